#include "safetext/interpret/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "safetext/errors.hpp"

namespace safetext::interpret {

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fill_color(double weight, double max_abs) {
  const double t = max_abs > 0.0 ? std::abs(weight) / max_abs : 0.0;
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  char buf[16];
  if (weight >= 0.0)
    std::snprintf(buf, sizeof(buf), "#ff%02x%02x", fade, fade);
  else
    std::snprintf(buf, sizeof(buf), "#%02x%02xff", fade, fade);
  return buf;
}

}  // namespace

void write_token_heatmap_svg(const std::string& path,
                             const std::vector<std::string>& tokens,
                             const std::vector<double>& weights,
                             const std::string& title) {
  if (tokens.size() != weights.size())
    throw ConfigError("heatmap tokens and weights must align");
  if (tokens.empty()) throw DataError("nothing to draw in the heatmap");

  double max_abs = 0.0;
  for (double w : weights) max_abs = std::max(max_abs, std::abs(w));

  constexpr double kCharW = 8.5, kPadX = 6.0, kGap = 4.0;
  constexpr double kRowH = 30.0, kMaxW = 860.0, kMargin = 20.0;

  struct Box {
    double x, y, w;
    std::size_t idx;
  };
  std::vector<Box> boxes;
  double x = kMargin, y = kMargin + 24.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double w = kCharW * static_cast<double>(tokens[i].size()) + 2 * kPadX;
    if (x + w > kMaxW && x > kMargin) {
      x = kMargin;
      y += kRowH + kGap;
    }
    boxes.push_back({x, y, w, i});
    x += w + kGap;
  }
  const double height = y + kRowH + kMargin;

  std::ofstream f(path);
  if (!f) throw DataError("cannot write svg file: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
    << static_cast<int>(kMaxW + kMargin) << "\" height=\""
    << static_cast<int>(height) << "\">\n";
  f << "<style>text{font-family:monospace;font-size:14px;}</style>\n";
  f << "<text x=\"" << kMargin << "\" y=\"" << kMargin + 4.0
    << "\" font-weight=\"bold\">" << escape_xml(title) << "</text>\n";
  for (const auto& b : boxes) {
    char wbuf[32];
    std::snprintf(wbuf, sizeof(wbuf), "%.4f", weights[b.idx]);
    f << "<rect x=\"" << b.x << "\" y=\"" << b.y << "\" width=\"" << b.w
      << "\" height=\"" << kRowH << "\" rx=\"4\" fill=\""
      << fill_color(weights[b.idx], max_abs) << "\" stroke=\"#999\"><title>"
      << escape_xml(tokens[b.idx]) << " " << wbuf << "</title></rect>\n";
    f << "<text x=\"" << b.x + kPadX << "\" y=\"" << b.y + 20.0 << "\">"
      << escape_xml(tokens[b.idx]) << "</text>\n";
  }
  f << "</svg>\n";
  if (!f.good()) throw DataError("failed writing svg file: " + path);
}

}  // namespace safetext::interpret
