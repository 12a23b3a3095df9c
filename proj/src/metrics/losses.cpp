// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/metrics/losses.hpp"

#include <sstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::metrics {

namespace {

void check_inputs(const torch::Tensor& probs, const torch::Tensor& labels, const char* where) {
  const bool ok = probs.dim() == 4 && labels.dim() == 3 && probs.size(0) == labels.size(0) &&
                  probs.size(2) == labels.size(1) && probs.size(3) == labels.size(2);
  if (!ok) {
    std::ostringstream msg;
    msg << where << ": probabilities " << probs.sizes() << " do not match labels " << labels.sizes();
    throw ShapeError(msg.str());
  }
  if (!probs.is_floating_point()) throw ShapeError(std::string(where) + ": probabilities must be floating point");
  if (labels.is_floating_point()) throw ShapeError(std::string(where) + ": labels must be integers");
  if (labels.numel() > 0) {
    const auto lo = labels.min().item<std::int64_t>();
    const auto hi = labels.max().item<std::int64_t>();
    if (lo < 0 || hi >= probs.size(1)) {
      throw ShapeError(std::string(where) + ": label value " + std::to_string(lo < 0 ? lo : hi) +
                       " outside [0, " + std::to_string(probs.size(1)) + ")");
    }
  }
}

}  // namespace

torch::Tensor cross_entropy_loss(const torch::Tensor& probs, const torch::Tensor& labels) {
  check_inputs(probs, labels, "cross_entropy_loss");
  const auto p_true = probs.gather(1, labels.to(torch::kLong).unsqueeze(1));
  return -p_true.clamp_min(kProbabilityFloor).log().mean();
}

torch::Tensor dice_loss_per_class(const torch::Tensor& probs, const torch::Tensor& labels) {
  check_inputs(probs, labels, "dice_loss");
  const auto y = torch::one_hot(labels.to(torch::kLong), probs.size(1)).permute({0, 3, 1, 2}).to(probs.dtype());
  const std::vector<std::int64_t> dims = {0, 2, 3};
  const auto intersection = (y * probs).sum(dims);
  const auto denominator = probs.square().sum(dims) + y.square().sum(dims);
  return 1.0 - (2.0 * intersection + kDiceSmooth) / (denominator + kDiceSmooth);
}

torch::Tensor dice_loss(const torch::Tensor& probs, const torch::Tensor& labels) {
  return dice_loss_per_class(probs, labels).mean();
}

LossTerms composite_loss_terms(const torch::Tensor& probs, const torch::Tensor& labels, const LossWeights& w) {
  LossTerms t;
  t.cross_entropy = metrics::cross_entropy_loss(probs, labels);
  t.dice = metrics::dice_loss(probs, labels);
  t.total = w.w_c * t.cross_entropy + w.w_d * t.dice;
  return t;
}

torch::Tensor composite_loss(const torch::Tensor& probs, const torch::Tensor& labels, const LossWeights& w) {
  return composite_loss_terms(probs, labels, w).total;
}

}  // namespace fmdseg::metrics
