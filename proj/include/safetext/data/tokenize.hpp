#pragma once

#include <string>
#include <vector>

namespace safetext::data {

// Lowercases, splits punctuation into single-character tokens, and otherwise
// splits on whitespace. Bytes outside ASCII are kept as word characters.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace safetext::data
