#pragma once

#include <string>
#include <vector>

namespace safetext::interpret {

// Token strip colored by signed weight: red for positive, blue for negative,
// intensity scaled by the largest magnitude.
void write_token_heatmap_svg(const std::string& path,
                             const std::vector<std::string>& tokens,
                             const std::vector<double>& weights,
                             const std::string& title);

}  // namespace safetext::interpret
