// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fmdseg::harness {

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PlotPanel {
  std::string y_label;
  std::vector<PlotPoint> points;  // drawn in the given order
};

/// Side-by-side line panels sharing one x label. Panels with no points draw
/// an empty frame with a "no data" note.
std::string sweep_plot_svg(const std::vector<PlotPanel>& panels, const std::string& x_label);

void write_svg(const std::filesystem::path& path, const std::string& svg);

/// Two decimals, no locale.
std::string format_fixed_weight(double value);

}  // namespace fmdseg::harness
