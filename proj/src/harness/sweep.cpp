// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/sweep.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/harness/plot.hpp"

namespace fmdseg::harness {

namespace fs = std::filesystem;

std::vector<LossWeights> default_loss_grid() { return {{0.5, 0.5}, {0.6, 0.4}, {0.7, 0.3}, {0.8, 0.2}}; }

namespace {

double parse_weight(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("loss grid: '" + std::string(s) + "' is not a number");
  }
}

}  // namespace

std::vector<LossWeights> parse_loss_grid(std::string_view text) {
  std::vector<LossWeights> grid;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view() : text.substr(comma + 1);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw ConfigError("loss grid: expected 'w_c:w_d', got '" + std::string(item) + "'");
    LossWeights w{parse_weight(item.substr(0, colon)), parse_weight(item.substr(colon + 1))};
    if (!(w.w_c >= 0.0) || !(w.w_d >= 0.0) || std::abs(w.w_c + w.w_d - 1.0) > 1e-9) {
      throw ConfigError("loss grid: weights " + std::string(item) + " must be non-negative and sum to 1");
    }
    grid.push_back(w);
  }
  if (grid.empty()) throw ConfigError("loss grid is empty");
  return grid;
}

std::string sweep_run_name(const LossWeights& w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "wc%.2f_wd%.2f", w.w_c, w.w_d);
  return buf;
}

std::vector<SweepPoint> sweep_loss(const ModelConfig& base, const std::vector<LossWeights>& grid,
                                   const ExperimentData& data, const fs::path& out_dir, TrainOptions options,
                                   const std::function<void(const SweepPoint&)>& on_point) {
  if (grid.empty()) throw ConfigError("loss grid is empty");
  fs::create_directories(out_dir);
  std::vector<SweepPoint> points;
  for (const auto& w : grid) {
    auto c = base;
    c.loss_weights = w;
    points.push_back({w, run_experiment(sweep_run_name(w), c, data, out_dir, options)});
    if (on_point) on_point(points.back());
  }

  std::ofstream csv(out_dir / "sweep.csv");
  csv << "w_c,w_d,status,mean_dsc_pct,mean_hd_mm,mean_hd95_mm\n";
  std::vector<PlotPoint> dsc, hd;
  for (const auto& p : points) {
    const auto& r = p.outcome.report;
    csv << format_fixed_weight(p.weights.w_c) << ',' << format_fixed_weight(p.weights.w_d) << ','
        << (p.outcome.ok ? "ok" : "failed");
    if (p.outcome.ok) {
      csv << ',' << metrics::format_fixed(r.mean_dsc_pct) << ',' << metrics::format_fixed(r.mean_hd) << ','
          << metrics::format_fixed(r.mean_hd95) << '\n';
      dsc.push_back({p.weights.w_c, r.mean_dsc_pct});
      hd.push_back({p.weights.w_c, r.mean_hd});
    } else {
      csv << ",,,\n";
    }
  }
  write_svg(out_dir / "sweep.svg",
            sweep_plot_svg({{"Average DSC (%)", dsc}, {"Average HD (mm)", hd}}, "Cross-entropy weight w_c"));
  return points;
}

}  // namespace fmdseg::harness
