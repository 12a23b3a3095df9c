// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <torch/torch.h>

#include "fmdseg/core/feature_map.hpp"
#include "fmdseg/mewb/mewb.hpp"
#include "fmdseg/network/stem.hpp"

namespace fmdseg::network {

/// x2 bilinear upsample, concatenation with the matching skip, two 3x3
/// conv-norm-ReLU fusions, then an optional MEWB at the stage resolution.
class DecoderStageImpl : public torch::nn::Module {
 public:
  DecoderStageImpl(std::int64_t in_channels, std::int64_t skip_channels, std::int64_t out_channels,
                   std::int64_t resolution, const mewb::MewbOptions* mewb_options);

  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& skip,
                        const ActivationProbe* probe = nullptr, std::string_view probe_prefix = "");

  ConvNormAct fuse1{nullptr};
  ConvNormAct fuse2{nullptr};
  mewb::MewbBlock mewb{nullptr};

 private:
  std::int64_t skip_channels_;
  std::int64_t resolution_;
};
TORCH_MODULE(DecoderStage);

struct DecoderOptions {
  std::int64_t hidden = 768;
  std::int64_t token_grid = 14;
  std::int64_t head_width = 512;
  std::array<std::int64_t, 4> widths = {256, 128, 64, 16};
  // Skip widths at strides 8, 4, 2 (deepest first, the order stages consume them).
  std::array<std::int64_t, 3> skip_widths = {512, 256, 64};
  bool use_mewb = false;
  std::int64_t mewb_groups = 4;
  std::int64_t ffn_expansion = 4;
};

/// Tokens (B, N, hidden) + refined skips -> (B, widths[3], 224, 224).
/// The 1x1 class head lives on the model.
class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(DecoderOptions options);

  /// skips are in stem order (strides 2, 4, 8). Throws ShapeError when a skip
  /// does not match its stage.
  torch::Tensor forward(const torch::Tensor& tokens, const std::array<torch::Tensor, 3>& skips,
                        const ActivationProbe* probe = nullptr);

  ConvNormAct conv_more{nullptr};
  DecoderStage stage1{nullptr};
  DecoderStage stage2{nullptr};
  DecoderStage stage3{nullptr};
  ConvNormAct final{nullptr};

 private:
  DecoderOptions options_;
};
TORCH_MODULE(Decoder);

/// Bilinear resize with align_corners=true, the decoder's upsampling rule.
torch::Tensor upsample_to(const torch::Tensor& x, std::int64_t size);

}  // namespace fmdseg::network
