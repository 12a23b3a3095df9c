// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::harness {

namespace {

constexpr double kPanelW = 360, kPanelH = 260, kMarginL = 60, kMarginB = 45, kMarginT = 20, kMarginR = 15;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_fixed_weight(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string sweep_plot_svg(const std::vector<PlotPanel>& panels, const std::string& x_label) {
  std::ostringstream svg;
  const double width = kPanelW * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << kPanelH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const double ox = kPanelW * static_cast<double>(p);
    const double x0 = ox + kMarginL, x1 = ox + kPanelW - kMarginR;
    const double y0 = kPanelH - kMarginB, y1 = kMarginT;
    svg << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kPanelH - 8 << "\" text-anchor=\"middle\">"
        << escape(x_label) << "</text>\n";
    svg << "<text transform=\"translate(" << ox + 14 << ',' << (y0 + y1) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(panel.y_label) << "</text>\n";
    if (panel.points.empty()) {
      svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << (y0 + y1) / 2
          << "\" text-anchor=\"middle\" fill=\"#888\">no data</text>\n";
      continue;
    }
    auto [xmin_it, xmax_it] = std::minmax_element(panel.points.begin(), panel.points.end(),
                                                  [](auto& a, auto& b) { return a.x < b.x; });
    auto [ymin_it, ymax_it] = std::minmax_element(panel.points.begin(), panel.points.end(),
                                                  [](auto& a, auto& b) { return a.y < b.y; });
    double xmin = xmin_it->x, xmax = xmax_it->x, ymin = ymin_it->y, ymax = ymax_it->y;
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    const double pad = std::max((ymax - ymin) * 0.1, 1e-6);
    ymin -= pad;
    ymax += pad;
    auto sx = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); };
    auto sy = [&](double y) { return y0 - (y - ymin) / (ymax - ymin) * (y0 - y1); };
    for (int t = 0; t <= 4; ++t) {
      const double yv = ymin + (ymax - ymin) * t / 4.0;
      svg << "<text x=\"" << x0 - 4 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
          << "</text>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& pt : panel.points) svg << sx(pt.x) << ',' << sy(pt.y) << ' ';
    svg << "\"/>\n";
    for (const auto& pt : panel.points) {
      svg << "<circle cx=\"" << sx(pt.x) << "\" cy=\"" << sy(pt.y) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
      svg << "<text x=\"" << sx(pt.x) << "\" y=\"" << y0 + 14 << "\" text-anchor=\"middle\">"
          << format_fixed_weight(pt.x) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::filesystem::path& path, const std::string& svg) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  out << svg;
}

}  // namespace fmdseg::harness
