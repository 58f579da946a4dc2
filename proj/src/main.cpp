#include "safetext/cli.hpp"

int main(int argc, char** argv) { return safetext::run_cli(argc, argv); }
