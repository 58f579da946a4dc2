#include "safetext/data/tokenize.hpp"

#include <cctype>

namespace safetext::data {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      flush();
    } else if (uc < 128 && std::ispunct(uc)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(uc < 128 ? static_cast<char>(std::tolower(uc)) : ch);
    }
  }
  flush();
  return out;
}

}  // namespace safetext::data
