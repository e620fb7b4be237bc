#include "metacon/heatmap.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace metacon {

namespace {

struct Rgb {
  int r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  auto mix = [t](int x, int y) {
    return static_cast<int>(x + (y - x) * t + 0.5);
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

// red -> white -> green
Rgb colormap(double t) {
  const Rgb red{215, 48, 39}, white{247, 247, 247}, green{26, 152, 80};
  t = std::clamp(t, 0.0, 1.0);
  return t < 0.5 ? lerp(red, white, t * 2.0) : lerp(white, green, (t - 0.5) * 2.0);
}

}  // namespace

void write_heatmap_svg(const std::string& path, const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::vector<std::vector<std::optional<double>>>& values) {
  const int cell = 64;
  const int left = 110, top = 60;
  const int rows = static_cast<int>(row_labels.size());
  const int cols = static_cast<int>(col_labels.size());
  const int width = left + cols * cell + 20;
  const int height = top + rows * cell + 30;

  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto& row : values)
    for (const auto& v : row)
      if (v) {
        if (!any) {
          lo = hi = *v;
          any = true;
        } else {
          lo = std::min(lo, *v);
          hi = std::max(hi, *v);
        }
      }
  if (!any || hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<text x=\"" << left / 2 << "\" y=\"" << top - 22
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << "train \\ test</text>\n";

  char buf[64];
  for (int c = 0; c < cols; ++c)
    out << "<text x=\"" << left + c * cell + cell / 2 << "\" y=\"" << top - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << col_labels[static_cast<size_t>(c)] << "</text>\n";
  for (int r = 0; r < rows; ++r)
    out << "<text x=\"" << left - 8 << "\" y=\"" << top + r * cell + cell / 2 + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << row_labels[static_cast<size_t>(r)] << "</text>\n";

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto& v = values[static_cast<size_t>(r)][static_cast<size_t>(c)];
      std::string fill = "#bdbdbd";
      std::string label = "n/a";
      if (v) {
        Rgb rgb = colormap((*v - lo) / (hi - lo));
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb.r, rgb.g, rgb.b);
        fill = buf;
        std::snprintf(buf, sizeof(buf), "%.2f", *v);
        label = buf;
      }
      const int x = left + c * cell, y = top + r * cell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"" << fill
          << "\" stroke=\"#555\"/>\n";
      out << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          << "font-size=\"12\">" << label << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace metacon
