// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/nn/layers.hpp"

namespace fmdseg::network {

/// Strided projection of the stride-16 stem map to (B, N, hidden) tokens plus
/// a learned position embedding. kernel = stride = patch_size / 16.
class PatchEmbeddingImpl : public torch::nn::Module, public nn::Seedable {
 public:
  PatchEmbeddingImpl(std::int64_t in_channels, std::int64_t hidden, std::int64_t patch_size);
  torch::Tensor forward(const torch::Tensor& features);
  void reset_parameters(at::Generator& gen) override;

  nn::Conv2d proj{nullptr};
  torch::Tensor position;

 private:
  std::int64_t grid_;
};
TORCH_MODULE(PatchEmbedding);

class SelfAttentionImpl : public torch::nn::Module {
 public:
  SelfAttentionImpl(std::int64_t hidden, std::int64_t heads);
  torch::Tensor forward(const torch::Tensor& tokens);

  nn::Linear qkv{nullptr};
  nn::Linear out{nullptr};

 private:
  std::int64_t heads_;
};
TORCH_MODULE(SelfAttention);

class MlpImpl : public torch::nn::Module {
 public:
  MlpImpl(std::int64_t hidden, std::int64_t expansion);
  torch::Tensor forward(const torch::Tensor& x);

  nn::Linear fc1{nullptr};
  nn::Linear fc2{nullptr};
};
TORCH_MODULE(Mlp);

/// Pre-norm block: x + MHSA(LN(x)), then x + MLP(LN(x)).
class TransformerLayerImpl : public torch::nn::Module {
 public:
  TransformerLayerImpl(std::int64_t hidden, std::int64_t heads, std::int64_t expansion);
  torch::Tensor forward(const torch::Tensor& tokens);

  nn::LayerNorm attn_norm{nullptr};
  SelfAttention attn{nullptr};
  nn::LayerNorm ffn_norm{nullptr};
  Mlp ffn{nullptr};
};
TORCH_MODULE(TransformerLayer);

class TransformerEncoderImpl : public torch::nn::Module {
 public:
  TransformerEncoderImpl(std::int64_t layers, std::int64_t hidden, std::int64_t heads,
                         std::int64_t expansion);
  torch::Tensor forward(torch::Tensor tokens);

  nn::LayerNorm final_norm{nullptr};

 private:
  std::vector<TransformerLayer> layers_;
};
TORCH_MODULE(TransformerEncoder);

}  // namespace fmdseg::network
