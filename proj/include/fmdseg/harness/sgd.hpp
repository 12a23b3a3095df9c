// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"

namespace fmdseg::harness {

/// SGD with heavy-ball momentum and L2 weight decay, per parameter:
///   d = g + wd * p
///   v = mu * v + d        (v starts at 0)
///   p = p - lr * v
/// Each line is evaluated as separate elementwise ops so the rounding matches
/// a scalar evaluation of the same recurrence.
class Sgd {
 public:
  Sgd(std::vector<std::pair<std::string, torch::Tensor>> params, double momentum, double weight_decay);

  /// Parameters without a gradient use g = 0.
  void step(double lr);
  void zero_grad();

  const std::map<std::string, torch::Tensor>& momentum_buffers() const noexcept { return buffers_; }
  /// Throws FormatError when a buffer is missing or has the wrong shape.
  void load_momentum_buffers(const std::map<std::string, torch::Tensor>& buffers);

 private:
  std::vector<std::pair<std::string, torch::Tensor>> params_;
  std::map<std::string, torch::Tensor> buffers_;
  double momentum_;
  double weight_decay_;
};

/// base * (1 - step / max_steps)^power, clamped at 0 past the end.
double poly_lr(double base, std::int64_t step, std::int64_t max_steps, double power);

/// Learning rate for `step` under the configured schedule.
double scheduled_lr(const OptimizerConfig& optimizer, std::int64_t step, std::int64_t max_steps);

}  // namespace fmdseg::harness
