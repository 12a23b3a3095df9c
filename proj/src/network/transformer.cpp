// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/network/transformer.hpp"

#include "fmdseg/core/config.hpp"
#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/feature_map.hpp"

namespace fmdseg::network {

PatchEmbeddingImpl::PatchEmbeddingImpl(std::int64_t in_channels, std::int64_t hidden,
                                       std::int64_t patch_size)
    : grid_(kImageSize / patch_size) {
  const auto k = patch_size / kStemStride;
  proj = register_module("proj", nn::Conv2d(nn::ConvOptions(in_channels, hidden, k).stride(k).padding(0)));
  position = register_parameter("position", torch::zeros({1, grid_ * grid_, hidden}));
}

void PatchEmbeddingImpl::reset_parameters(at::Generator& gen) {
  torch::NoGradGuard no_grad;
  position.normal_(0.0, 0.02, gen);
}

torch::Tensor PatchEmbeddingImpl::forward(const torch::Tensor& features) {
  require_feature_map(features, "patch_embedding");
  auto x = proj->forward(features);
  if (x.size(2) != grid_ || x.size(3) != grid_) {
    throw ShapeError("patch_embedding: token grid " + std::to_string(x.size(2)) + "x" +
                     std::to_string(x.size(3)) + " does not match " + std::to_string(grid_));
  }
  return x.flatten(2).transpose(1, 2) + position;
}

SelfAttentionImpl::SelfAttentionImpl(std::int64_t hidden, std::int64_t heads) : heads_(heads) {
  qkv = register_module("qkv", nn::Linear(hidden, 3 * hidden));
  out = register_module("out", nn::Linear(hidden, hidden));
}

torch::Tensor SelfAttentionImpl::forward(const torch::Tensor& tokens) {
  const auto b = tokens.size(0);
  const auto n = tokens.size(1);
  const auto d = tokens.size(2);
  // (B, N, 3, heads, d/heads) -> three (B, heads, N, d/heads)
  const auto parts = qkv->forward(tokens).view({b, n, 3, heads_, d / heads_}).permute({2, 0, 3, 1, 4});
  const auto y = at::scaled_dot_product_attention(parts[0], parts[1], parts[2]);
  return out->forward(y.transpose(1, 2).reshape({b, n, d}));
}

MlpImpl::MlpImpl(std::int64_t hidden, std::int64_t expansion) {
  fc1 = register_module("fc1", nn::Linear(hidden, hidden * expansion));
  fc2 = register_module("fc2", nn::Linear(hidden * expansion, hidden));
}

torch::Tensor MlpImpl::forward(const torch::Tensor& x) { return fc2->forward(torch::gelu(fc1->forward(x))); }

TransformerLayerImpl::TransformerLayerImpl(std::int64_t hidden, std::int64_t heads, std::int64_t expansion) {
  attn_norm = register_module("attn_norm", nn::LayerNorm(hidden));
  attn = register_module("attn", SelfAttention(hidden, heads));
  ffn_norm = register_module("ffn_norm", nn::LayerNorm(hidden));
  ffn = register_module("ffn", Mlp(hidden, expansion));
}

torch::Tensor TransformerLayerImpl::forward(const torch::Tensor& tokens) {
  const auto x = tokens + attn->forward(attn_norm->forward(tokens));
  return x + ffn->forward(ffn_norm->forward(x));
}

TransformerEncoderImpl::TransformerEncoderImpl(std::int64_t layers, std::int64_t hidden, std::int64_t heads,
                                               std::int64_t expansion) {
  for (std::int64_t i = 0; i < layers; ++i) {
    layers_.push_back(register_module("layer" + std::to_string(i), TransformerLayer(hidden, heads, expansion)));
  }
  final_norm = register_module("final_norm", nn::LayerNorm(hidden));
}

torch::Tensor TransformerEncoderImpl::forward(torch::Tensor tokens) {
  for (auto& layer : layers_) tokens = layer->forward(tokens);
  return final_norm->forward(tokens);
}

}  // namespace fmdseg::network
