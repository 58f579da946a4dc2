#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace safetext::data {

// RFC 4180 parsing: quoted fields, doubled-quote escapes, CRLF line ends, and
// newlines inside quoted fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::vector<std::vector<std::string>> read_csv(const std::string& path);

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace safetext::data
