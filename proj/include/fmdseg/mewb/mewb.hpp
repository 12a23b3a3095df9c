// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <torch/torch.h>

#include "fmdseg/core/feature_map.hpp"
#include "fmdseg/mewb/spectral.hpp"
#include "fmdseg/nn/layers.hpp"

namespace fmdseg::mewb {

/// (x - mean) / sqrt(var + eps) per (sample, group), then per-channel affine.
/// Throws ShapeError when C is not divisible by `groups`.
torch::Tensor group_normalize(const torch::Tensor& x, std::int64_t groups, const torch::Tensor& weight,
                              const torch::Tensor& bias, double eps = 1e-5);

struct MewbOptions {
  MewbOptions(std::int64_t channels, std::int64_t height, std::int64_t width)
      : channels_(channels), height_(height), width_(width) {}
  TORCH_ARG(std::int64_t, channels);
  // Spatial size the spectral weights are laid out for.
  TORCH_ARG(std::int64_t, height);
  TORCH_ARG(std::int64_t, width);
  TORCH_ARG(std::int64_t, groups) = 4;
  TORCH_ARG(std::int64_t, ffn_expansion) = 4;
  TORCH_ARG(double, eps) = 1e-5;
};

/// 1x1 expansion, GELU, 1x1 projection. The projection starts at zero so a
/// fresh block's second residual is an identity.
class FeedForwardImpl : public torch::nn::Module {
 public:
  FeedForwardImpl(std::int64_t channels, std::int64_t expansion);
  torch::Tensor forward(const torch::Tensor& x);

  nn::Conv2d expand{nullptr};
  nn::Conv2d project{nullptr};
};
TORCH_MODULE(FeedForward);

/// The three frequency-domain branches, one filter per axis pair.
class SpectralBranchesImpl : public torch::nn::Module {
 public:
  SpectralBranchesImpl(std::int64_t branch_channels, std::int64_t height, std::int64_t width);
  SpectralFilter& filter(AxisPair axis);

  SpectralFilter hw{nullptr};
  SpectralFilter cw{nullptr};
  SpectralFilter ch{nullptr};
};
TORCH_MODULE(SpectralBranches);

/// Multi-axis external weights block.
///
///   u = GroupNorm(x)
///   [u_hw, u_cw, u_ch, u_local] = split(u, 4 equal channel groups)
///   m = concat(F_hw^-1(W_hw F_hw u_hw), F_cw^-1(...), F_ch^-1(...), DWConv(u_local))
///   v = x + m
///   y = v + FFN(v)
///
/// Shape preserving; the input spatial size must match the size the block
/// was built for.
class MewbBlockImpl : public torch::nn::Module {
 public:
  explicit MewbBlockImpl(MewbOptions options);

  torch::Tensor forward(const torch::Tensor& x, const ActivationProbe* probe = nullptr,
                        std::string_view probe_prefix = "mewb");

  /// Fourth branch on its own (depthwise 3x3 then pointwise 1x1).
  torch::Tensor local_branch(const torch::Tensor& x);

  const MewbOptions& options() const noexcept { return options_; }

  nn::GroupNorm norm{nullptr};
  SpectralBranches spectral{nullptr};
  nn::DwConv local{nullptr};
  FeedForward ffn{nullptr};

 private:
  MewbOptions options_;
};
TORCH_MODULE(MewbBlock);

}  // namespace fmdseg::mewb
