// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/sgd.hpp"

#include <cmath>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::harness {

Sgd::Sgd(std::vector<std::pair<std::string, torch::Tensor>> params, double momentum, double weight_decay)
    : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
  for (const auto& [name, p] : params_) buffers_.emplace(name, torch::zeros_like(p));
}

void Sgd::step(double lr) {
  torch::NoGradGuard no_grad;
  for (auto& [name, p] : params_) {
    auto& v = buffers_.at(name);
    const auto& g = p.grad();
    auto d = p * weight_decay_;
    if (g.defined()) d = g + d;
    v.mul_(momentum_).add_(d);
    p.sub_(v * lr);
  }
}

void Sgd::zero_grad() {
  for (auto& [name, p] : params_) {
    if (p.grad().defined()) p.mutable_grad() = torch::Tensor();
  }
}

void Sgd::load_momentum_buffers(const std::map<std::string, torch::Tensor>& buffers) {
  for (auto& [name, v] : buffers_) {
    const auto it = buffers.find(name);
    if (it == buffers.end()) throw FormatError("optimizer state lacks a momentum buffer for '" + name + "'");
    if (it->second.sizes() != v.sizes()) throw FormatError("momentum buffer for '" + name + "' has the wrong shape");
    v.copy_(it->second);
  }
}

double poly_lr(double base, std::int64_t step, std::int64_t max_steps, double power) {
  if (max_steps <= 0) return base;
  const double frac = 1.0 - static_cast<double>(step) / static_cast<double>(max_steps);
  return frac <= 0.0 ? 0.0 : base * std::pow(frac, power);
}

double scheduled_lr(const OptimizerConfig& optimizer, std::int64_t step, std::int64_t max_steps) {
  switch (optimizer.schedule) {
    case LrSchedule::constant: return optimizer.learning_rate;
    case LrSchedule::poly: return poly_lr(optimizer.learning_rate, step, max_steps, optimizer.poly_power);
  }
  return optimizer.learning_rate;
}

}  // namespace fmdseg::harness
