// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"

namespace fmdseg::data {

using Rng = std::mt19937_64;

/// Text round trip of the full engine state.
std::string save_rng(const Rng& rng);
Rng load_rng(const std::string& state);

/// Uniform double in [0, 1) from 53 engine bits (portable across standard
/// libraries, unlike std::uniform_real_distribution).
double uniform01(Rng& rng);

struct AugmentedPair {
  torch::Tensor image;   // (H, W) float32
  torch::Tensor labels;  // (H, W) int64
};

/// Samples, in order: rotation angle, horizontal flip, vertical flip,
/// contrast factor, noise seed. The same geometric transform is applied to
/// image (bilinear) and labels (nearest); contrast and noise touch the image
/// only. Multiples of 90 degrees use exact index permutations.
AugmentedPair augment(const torch::Tensor& image, const torch::Tensor& labels, const AugmentationConfig& config,
                      Rng& rng);

/// Rotation by `degrees` counter-clockwise about the image centre with zero
/// fill. `nearest` selects nearest-neighbour sampling (labels).
torch::Tensor rotate(const torch::Tensor& map, double degrees, bool nearest);

}  // namespace fmdseg::data
