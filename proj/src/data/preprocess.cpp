// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/data/preprocess.hpp"

#include "fmdseg/core/errors.hpp"

namespace fmdseg::data {

namespace F = torch::nn::functional;

torch::Tensor preprocess_slice(const torch::Tensor& slice, const IntensityWindow& window, std::int64_t size) {
  if (slice.dim() != 2) throw ShapeError("preprocess_slice: expected a 2D slice");
  auto x = slice.to(torch::kFloat32).clamp(window.low, window.high);
  if (x.size(0) != size || x.size(1) != size) {
    x = F::interpolate(x.unsqueeze(0).unsqueeze(0), F::InterpolateFuncOptions()
                                                        .size(std::vector<std::int64_t>{size, size})
                                                        .mode(torch::kBilinear)
                                                        .align_corners(false))
            .squeeze(0)
            .squeeze(0);
  }
  // Normalizing after the resize keeps the output range exactly [0, 1], which
  // makes the transform idempotent.
  const auto lo = x.min();
  const auto range = x.max() - lo;
  if (range.item<float>() <= 0.0f) return torch::zeros_like(x);
  return (x - lo) / range;
}

torch::Tensor resize_nearest(const torch::Tensor& labels, std::int64_t height, std::int64_t width) {
  if (labels.dim() != 2) throw ShapeError("resize_nearest: expected a 2D label map");
  if (labels.size(0) == height && labels.size(1) == width) return labels.to(torch::kLong);
  return F::interpolate(labels.to(torch::kFloat32).unsqueeze(0).unsqueeze(0),
                        F::InterpolateFuncOptions()
                            .size(std::vector<std::int64_t>{height, width})
                            .mode(torch::kNearest))
      .squeeze(0)
      .squeeze(0)
      .to(torch::kLong);
}

torch::Tensor preprocess_labels(const torch::Tensor& labels, std::int64_t size) {
  return resize_nearest(labels, size, size);
}

}  // namespace fmdseg::data
