// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"

namespace fmdseg::data {

/// Intensity window applied before normalization (Hounsfield units).
struct IntensityWindow {
  double low = -125.0;
  double high = 275.0;
};

/// 2D slice -> (224, 224) float32 in [0, 1]:
/// clip to the window, bilinear resize, then per-slice min-max. A constant
/// slice maps to all zeros. Applying it twice equals applying it once.
torch::Tensor preprocess_slice(const torch::Tensor& slice, const IntensityWindow& window = {},
                               std::int64_t size = kImageSize);

/// 2D label slice -> (size, size) int64 by nearest-neighbour resampling;
/// the output value set is a subset of the input's.
torch::Tensor preprocess_labels(const torch::Tensor& labels, std::int64_t size = kImageSize);

/// Nearest-neighbour resize of an integer (H, W) map.
torch::Tensor resize_nearest(const torch::Tensor& labels, std::int64_t height, std::int64_t width);

}  // namespace fmdseg::data
