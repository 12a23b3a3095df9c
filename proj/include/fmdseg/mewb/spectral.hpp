// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/nn/layers.hpp"

namespace fmdseg::mewb {

/// Plane of a (B,C,H,W) tensor over which a 2D DFT is taken.
enum class AxisPair { HW, CW, CH };

inline constexpr std::array<AxisPair, 3> kAxisPairs = {AxisPair::HW, AxisPair::CW, AxisPair::CH};

std::string_view to_string(AxisPair axis) noexcept;

/// Tensor dims transformed for `axis`; the second one is the halved
/// (real-input) dimension of the spectrum.
std::array<std::int64_t, 2> transform_dims(AxisPair axis) noexcept;

/// Shape of the learnable weights for a branch input with `channels`,
/// `height`, `width`, laid out to broadcast over the untouched dimension:
///   HW: (H, W/2+1)   CW: (C, 1, W/2+1)   CH: (C, H/2+1, 1)
std::vector<std::int64_t> spectral_weight_shape(AxisPair axis, std::int64_t channels,
                                                std::int64_t height, std::int64_t width);

/// y = irfft2(rfft2(x) * (real + i*imag)) over the plane selected by `axis`.
/// The output is real by construction and has the shape of x.
/// Throws ShapeError when the weights do not match x's half-spectrum.
torch::Tensor spectral_branch(const torch::Tensor& x, AxisPair axis, const torch::Tensor& real,
                              const torch::Tensor& imag);

/// Learnable complex filter for one axis pair, stored as real and imaginary
/// parts. Starts as the identity filter (1 + 0i).
class SpectralFilterImpl : public torch::nn::Module, public nn::Seedable {
 public:
  SpectralFilterImpl(AxisPair axis, std::int64_t channels, std::int64_t height, std::int64_t width);
  torch::Tensor forward(const torch::Tensor& x);
  void reset_parameters(at::Generator& gen) override;
  AxisPair axis() const noexcept { return axis_; }

  torch::Tensor real;
  torch::Tensor imag;

 private:
  AxisPair axis_;
};
TORCH_MODULE(SpectralFilter);

}  // namespace fmdseg::mewb
