// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/mewb/spectral.hpp"

#include <sstream>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/feature_map.hpp"

namespace fmdseg::mewb {

std::string_view to_string(AxisPair axis) noexcept {
  switch (axis) {
    case AxisPair::HW: return "hw";
    case AxisPair::CW: return "cw";
    case AxisPair::CH: return "ch";
  }
  return "?";
}

std::array<std::int64_t, 2> transform_dims(AxisPair axis) noexcept {
  switch (axis) {
    case AxisPair::HW: return {2, 3};
    case AxisPair::CW: return {1, 3};
    case AxisPair::CH: return {1, 2};
  }
  return {2, 3};
}

std::vector<std::int64_t> spectral_weight_shape(AxisPair axis, std::int64_t channels,
                                                std::int64_t height, std::int64_t width) {
  switch (axis) {
    case AxisPair::HW: return {height, width / 2 + 1};
    case AxisPair::CW: return {channels, 1, width / 2 + 1};
    case AxisPair::CH: return {channels, height / 2 + 1, 1};
  }
  return {};
}

torch::Tensor spectral_branch(const torch::Tensor& x, AxisPair axis, const torch::Tensor& real,
                              const torch::Tensor& imag) {
  require_feature_map(x, "spectral_branch");
  const auto expected = spectral_weight_shape(axis, x.size(1), x.size(2), x.size(3));
  if (real.sizes() != torch::IntArrayRef(expected) || imag.sizes() != torch::IntArrayRef(expected)) {
    std::ostringstream msg;
    msg << "spectral_branch(" << to_string(axis) << "): weights " << real.sizes()
        << " do not match the half-spectrum " << torch::IntArrayRef(expected) << " of input "
        << x.sizes();
    throw ShapeError(msg.str());
  }
  const auto dims = transform_dims(axis);
  const std::array<std::int64_t, 2> lengths = {x.size(dims[0]), x.size(dims[1])};
  auto spectrum = torch::fft::rfft2(x, c10::nullopt, dims);
  spectrum = spectrum * torch::complex(real, imag);
  return torch::fft::irfft2(spectrum, lengths, dims);
}

SpectralFilterImpl::SpectralFilterImpl(AxisPair axis, std::int64_t channels, std::int64_t height,
                                       std::int64_t width)
    : axis_(axis) {
  const auto shape = spectral_weight_shape(axis, channels, height, width);
  real = register_parameter("real", torch::ones(shape));
  imag = register_parameter("imag", torch::zeros(shape));
}

void SpectralFilterImpl::reset_parameters(at::Generator&) {
  real.fill_(1.0);
  imag.zero_();
}

torch::Tensor SpectralFilterImpl::forward(const torch::Tensor& x) {
  return spectral_branch(x, axis_, real, imag);
}

}  // namespace fmdseg::mewb
