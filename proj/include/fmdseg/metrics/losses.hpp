// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"

namespace fmdseg::metrics {

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kDiceSmooth = 1e-5;

// All losses take per-pixel class probabilities (B, C, H, W) and integer
// labels (B, H, W) with values in [0, C). ShapeError on any mismatch.

/// Mean over pixels of -log(max(p_true, 1e-12)).
torch::Tensor cross_entropy_loss(const torch::Tensor& probs, const torch::Tensor& labels);

/// Per class c, with sums over batch and pixels:
///   1 - (2 sum(y p) + 1e-5) / (sum(p^2) + sum(y^2) + 1e-5)
/// averaged over the C classes.
torch::Tensor dice_loss(const torch::Tensor& probs, const torch::Tensor& labels);

/// Per-class dice terms, shape (C,). dice_loss is their mean.
torch::Tensor dice_loss_per_class(const torch::Tensor& probs, const torch::Tensor& labels);

struct LossTerms {
  torch::Tensor total;
  torch::Tensor cross_entropy;
  torch::Tensor dice;
};

/// w_c * cross_entropy_loss + w_d * dice_loss.
LossTerms composite_loss_terms(const torch::Tensor& probs, const torch::Tensor& labels, const LossWeights& w);
torch::Tensor composite_loss(const torch::Tensor& probs, const torch::Tensor& labels, const LossWeights& w);

}  // namespace fmdseg::metrics
