#pragma once

namespace safetext {

// Parses argv and runs one subcommand. Returns the process exit code:
// 0 success, 1 usage or configuration error, 2 data error, 3 numeric error.
int run_cli(int argc, char** argv);

}  // namespace safetext
