// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/nn/layers.hpp"

namespace fmdseg::network {

/// Convolution, GroupNorm, optional ReLU.
class ConvNormActImpl : public torch::nn::Module {
 public:
  ConvNormActImpl(nn::ConvOptions conv, bool relu = true);
  torch::Tensor forward(const torch::Tensor& x);

  nn::Conv2d conv{nullptr};
  nn::GroupNorm norm{nullptr};

 private:
  bool relu_;
};
TORCH_MODULE(ConvNormAct);

/// ResNet bottleneck unit with weight-standardized convolutions:
/// 1x1 reduce, 3x3 (strided), 1x1 expand, projection shortcut when needed.
class BottleneckImpl : public torch::nn::Module {
 public:
  BottleneckImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t stride);
  torch::Tensor forward(const torch::Tensor& x);

  ConvNormAct reduce{nullptr};
  ConvNormAct spatial{nullptr};
  ConvNormAct expand{nullptr};
  ConvNormAct shortcut{nullptr};
};
TORCH_MODULE(Bottleneck);

class ResidualStageImpl : public torch::nn::Module {
 public:
  ResidualStageImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t units,
                    std::int64_t stride);
  torch::Tensor forward(torch::Tensor x);

 private:
  std::vector<Bottleneck> units_;
};
TORCH_MODULE(ResidualStage);

struct StemOutput {
  // Strides 2, 4, 8 (shallowest first).
  std::array<torch::Tensor, 3> skips;
  // Stride 16, fed to the bottleneck blocks and the patch embedding.
  torch::Tensor features;
};

struct StemOptions {
  std::int64_t in_channels = 1;
  std::array<std::int64_t, 4> widths = {64, 256, 512, 1024};
  std::array<std::int64_t, 3> units = {3, 4, 9};
};

/// Hybrid-encoder convolution stem (R50 layout): a 7x7/2 root conv, 3x3/2
/// max-pool, then three residual stages at strides 4, 8, 16.
class ConvStemImpl : public torch::nn::Module {
 public:
  explicit ConvStemImpl(StemOptions options);
  /// Throws ShapeError unless the input is (B, 1 or in_channels, 224, 224).
  StemOutput forward(const torch::Tensor& images);

  ConvNormAct root{nullptr};
  ResidualStage block1{nullptr};
  ResidualStage block2{nullptr};
  ResidualStage block3{nullptr};

 private:
  StemOptions options_;
};
TORCH_MODULE(ConvStem);

}  // namespace fmdseg::network
