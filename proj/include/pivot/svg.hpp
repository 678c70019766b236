#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "pivot/io.hpp"

namespace pivot {

struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<double> values;
};

// Static SVG line chart: x axis is the series index (batch/step), y axis is
// auto-scaled to [0, max]. Plain file rendering of a CSV, no interactivity.
inline std::string render_line_chart(const std::string& title,
                                     const std::vector<SvgSeries>& series,
                                     int width = 720, int height = 420) {
  const int margin_left = 60, margin_right = 20, margin_top = 40,
            margin_bottom = 40;
  const double plot_w = width - margin_left - margin_right;
  const double plot_h = height - margin_top - margin_bottom;

  size_t n = 0;
  double y_max = 0.0;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) y_max = std::max(y_max, v);
  }
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.05;

  auto x_at = [&](size_t i) {
    return margin_left +
           (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1)
                  : plot_w / 2);
  };
  auto y_at = [&](double v) { return margin_top + plot_h * (1.0 - v / y_max); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" +
         title + "</text>\n";
  // axes
  svg += "<line x1=\"" + std::to_string(margin_left) + "\" y1=\"" +
         std::to_string(margin_top) + "\" x2=\"" + std::to_string(margin_left) +
         "\" y2=\"" + std::to_string(height - margin_bottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + std::to_string(margin_left) + "\" y1=\"" +
         std::to_string(height - margin_bottom) + "\" x2=\"" +
         std::to_string(width - margin_right) + "\" y2=\"" +
         std::to_string(height - margin_bottom) + "\" stroke=\"black\"/>\n";
  // y-axis gridlines at quarters
  for (int q = 0; q <= 4; ++q) {
    const double v = y_max * q / 4.0;
    const double y = y_at(v);
    svg += "<line x1=\"" + std::to_string(margin_left) + "\" y1=\"" +
           fmt_double(y) + "\" x2=\"" + std::to_string(width - margin_right) +
           "\" y2=\"" + fmt_double(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg += "<text x=\"" + std::to_string(margin_left - 6) + "\" y=\"" +
           fmt_double(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">" +
           fmt_double(v) + "</text>\n";
  }
  int legend_y = margin_top;
  for (const auto& s : series) {
    if (!s.values.empty()) {
      std::string points;
      for (size_t i = 0; i < s.values.size(); ++i) {
        if (i) points += ' ';
        points += fmt_double(x_at(i)) + "," + fmt_double(y_at(s.values[i]));
      }
      svg += "<polyline fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    svg += "<rect x=\"" + std::to_string(width - margin_right - 130) +
           "\" y=\"" + std::to_string(legend_y) +
           "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
    svg += "<text x=\"" + std::to_string(width - margin_right - 115) +
           "\" y=\"" + std::to_string(legend_y + 9) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name +
           "</text>\n";
    legend_y += 16;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace pivot
