// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string_view>
#include <vector>

#include "fmdseg/core/config.hpp"
#include "fmdseg/harness/experiment.hpp"

namespace fmdseg::harness {

/// The four weightings compared by the loss sweep.
std::vector<LossWeights> default_loss_grid();

/// "0.5:0.5,0.6:0.4". Each pair must be non-negative and sum to 1 within
/// 1e-9, otherwise ConfigError.
std::vector<LossWeights> parse_loss_grid(std::string_view text);

struct SweepPoint {
  LossWeights weights;
  RunOutcome outcome;
};

/// Trains and evaluates `base` once per grid point, in grid order, all with
/// the same seed. Writes sweep.csv and sweep.svg under `out_dir`.
std::vector<SweepPoint> sweep_loss(const ModelConfig& base, const std::vector<LossWeights>& grid,
                                   const ExperimentData& data, const std::filesystem::path& out_dir,
                                   TrainOptions options = {},
                                   const std::function<void(const SweepPoint&)>& on_point = {});

/// Run directory name for one grid point, e.g. "wc0.60_wd0.40".
std::string sweep_run_name(const LossWeights& w);

}  // namespace fmdseg::harness
