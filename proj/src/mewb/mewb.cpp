// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/mewb/mewb.hpp"

#include <sstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::mewb {

torch::Tensor group_normalize(const torch::Tensor& x, std::int64_t groups, const torch::Tensor& weight,
                              const torch::Tensor& bias, double eps) {
  require_feature_map(x, "group_normalize");
  if (groups < 1 || x.size(1) % groups != 0) {
    std::ostringstream msg;
    msg << "group_normalize: " << x.size(1) << " channels not divisible into " << groups << " groups";
    throw ShapeError(msg.str());
  }
  return torch::group_norm(x, groups, weight, bias, eps);
}

FeedForwardImpl::FeedForwardImpl(std::int64_t channels, std::int64_t expansion) {
  expand = register_module("expand", nn::Conv2d(nn::ConvOptions(channels, channels * expansion, 1)));
  project = register_module(
      "project", nn::Conv2d(nn::ConvOptions(channels * expansion, channels, 1).init(nn::Init::zeros)));
}

torch::Tensor FeedForwardImpl::forward(const torch::Tensor& x) {
  return project->forward(torch::gelu(expand->forward(x)));
}

SpectralBranchesImpl::SpectralBranchesImpl(std::int64_t branch_channels, std::int64_t height,
                                           std::int64_t width) {
  hw = register_module("hw", SpectralFilter(AxisPair::HW, branch_channels, height, width));
  cw = register_module("cw", SpectralFilter(AxisPair::CW, branch_channels, height, width));
  ch = register_module("ch", SpectralFilter(AxisPair::CH, branch_channels, height, width));
}

SpectralFilter& SpectralBranchesImpl::filter(AxisPair axis) {
  switch (axis) {
    case AxisPair::HW: return hw;
    case AxisPair::CW: return cw;
    case AxisPair::CH: return ch;
  }
  return hw;
}

MewbBlockImpl::MewbBlockImpl(MewbOptions options) : options_(std::move(options)) {
  const auto& o = options_;
  if (o.channels() % 4 != 0) {
    throw ShapeError("MEWB: channel count " + std::to_string(o.channels()) +
                     " is not divisible by 4 (one group per branch)");
  }
  if (o.channels() % o.groups() != 0) {
    throw ShapeError("MEWB: channel count " + std::to_string(o.channels()) +
                     " is not divisible by the GroupNorm group count " + std::to_string(o.groups()));
  }
  const auto branch = o.channels() / 4;
  norm = register_module("norm", nn::GroupNorm(o.groups(), o.channels(), o.eps()));
  spectral = register_module("spectral", SpectralBranches(branch, o.height(), o.width()));
  local = register_module("local", nn::DwConv(nn::DwConvOptions(branch, branch)));
  ffn = register_module("ffn", FeedForward(o.channels(), o.ffn_expansion()));
}

torch::Tensor MewbBlockImpl::local_branch(const torch::Tensor& x) { return local->forward(x); }

torch::Tensor MewbBlockImpl::forward(const torch::Tensor& x, const ActivationProbe* probe,
                                     std::string_view probe_prefix) {
  const auto& o = options_;
  require_channels(x, o.channels(), "MEWB");
  if (x.size(2) != o.height() || x.size(3) != o.width()) {
    std::ostringstream msg;
    msg << "MEWB: built for " << o.height() << "x" << o.width() << " inputs, got " << x.size(2) << "x"
        << x.size(3);
    throw ShapeError(msg.str());
  }
  const auto u = norm->forward(x);
  emit(probe, probe_name(probe_prefix, "norm"), u);
  const auto parts = u.chunk(4, 1);
  auto mixed = torch::cat({spectral->hw->forward(parts[0]), spectral->cw->forward(parts[1]),
                           spectral->ch->forward(parts[2]), local->forward(parts[3])},
                          1);
  emit(probe, probe_name(probe_prefix, "branches"), mixed);
  auto v = x + mixed;
  auto y = v + ffn->forward(v);
  emit(probe, probe_name(probe_prefix, "out"), y);
  return y;
}

}  // namespace fmdseg::mewb
