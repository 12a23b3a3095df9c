// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <torch/torch.h>

#include "fmdseg/nn/layers.hpp"

namespace fmdseg::da_plus {

/// Softmax attention over spatial positions without materializing the
/// (N x N) map. query/key: (B, dk, N), value: (B, dv, N) -> (B, dv, N) with
///   out[b, :, i] = sum_j softmax_j(<query[b, :, i], key[b, :, j]>) value[b, :, j].
/// Differentiable in all three inputs (float32 and float64).
torch::Tensor spatial_attention(const torch::Tensor& query, const torch::Tensor& key,
                                const torch::Tensor& value);

/// Same contract through an explicit (B, N, N) softmax; for small inputs.
torch::Tensor spatial_attention_reference(const torch::Tensor& query, const torch::Tensor& key,
                                          const torch::Tensor& value);

/// Position attention module:
///   A = softmax_rows(Q^T K)  (N x N over H*W positions)
///   y = x + alpha * (V A^T)
/// Q and K are 1x1 projections to max(1, C/8) channels, V keeps C. The gate
/// alpha starts at 0 so a fresh module is the identity.
class PositionAttentionImpl : public torch::nn::Module, public nn::Seedable {
 public:
  explicit PositionAttentionImpl(std::int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);
  /// Row-stochastic (B, N, N) attention map for x; explicit, so small inputs only.
  torch::Tensor attention_map(const torch::Tensor& x);
  void reset_parameters(at::Generator& gen) override;
  std::int64_t key_channels() const noexcept { return key_channels_; }

  nn::Conv2d query{nullptr};
  nn::Conv2d key{nullptr};
  nn::Conv2d value{nullptr};
  torch::Tensor alpha;

 private:
  std::int64_t channels_;
  std::int64_t key_channels_;
};
TORCH_MODULE(PositionAttention);

/// Channel attention module:
///   M = softmax_rows(X X^T)  (C x C Gram map of the flattened input)
///   y = x + beta * (M X)
/// The gate beta starts at 0.
class ChannelAttentionImpl : public torch::nn::Module, public nn::Seedable {
 public:
  ChannelAttentionImpl();
  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor attention_map(const torch::Tensor& x);
  void reset_parameters(at::Generator& gen) override;

  torch::Tensor beta;
};
TORCH_MODULE(ChannelAttention);

}  // namespace fmdseg::da_plus
