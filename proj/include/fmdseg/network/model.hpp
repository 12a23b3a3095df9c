// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <optional>

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"
#include "fmdseg/core/feature_map.hpp"
#include "fmdseg/da_plus/da_plus.hpp"
#include "fmdseg/mewb/mewb.hpp"
#include "fmdseg/network/decoder.hpp"
#include "fmdseg/network/stem.hpp"
#include "fmdseg/network/transformer.hpp"

namespace fmdseg::network {

struct EncoderFeatures {
  // Stem order: strides 2, 4, 8.
  std::array<torch::Tensor, 3> skips;
  // (B, token_grid^2, hidden_dim)
  torch::Tensor bottleneck;
};

/// Holder for the per-skip DA+ blocks ("skip_da.layer<k>").
class SkipRefinerImpl : public torch::nn::Module {
 public:
  explicit SkipRefinerImpl(const ModelConfig& config);
  std::array<torch::Tensor, 3> forward(const std::array<torch::Tensor, 3>& skips,
                                       const ActivationProbe* probe = nullptr);
  /// Block for skip layer 1..3, null when that layer is not refined.
  da_plus::DaPlusBlock& layer(int k) { return layers_[static_cast<std::size_t>(k - 1)]; }

 private:
  std::array<da_plus::DaPlusBlock, 3> layers_ = {nullptr, nullptr, nullptr};
  std::array<int, 3> levels_{};
};
TORCH_MODULE(SkipRefiner);

/// Hybrid CNN-Transformer U-shaped segmenter with optional MEWB and DA+
/// blocks. Which blocks exist is fixed by the (validated) config at
/// construction; parameter paths are canonical and variant independent.
///
/// Probe names at block boundaries: stem.skip1..3, stem.out, enc_mewb.*,
/// enc_da.*, embed.tokens, transformer.out, skip_da.layer<k>.*, skip<k>.out,
/// dec.*, logits.
class FmdTransUNetImpl : public torch::nn::Module {
 public:
  explicit FmdTransUNetImpl(const ModelConfig& config);

  /// (B, 1, 224, 224) images -> (B, 9, 224, 224) logits.
  torch::Tensor forward(const torch::Tensor& images, const ActivationProbe* probe = nullptr);

  EncoderFeatures encode(const torch::Tensor& images, const ActivationProbe* probe = nullptr);
  std::array<torch::Tensor, 3> refine_skips(const std::array<torch::Tensor, 3>& skips,
                                            const ActivationProbe* probe = nullptr);
  torch::Tensor decode(const EncoderFeatures& features, const ActivationProbe* probe = nullptr);

  const ModelConfig& config() const noexcept { return config_; }

  ConvStem stem{nullptr};
  mewb::MewbBlock enc_mewb{nullptr};
  da_plus::DaPlusBlock enc_da{nullptr};
  PatchEmbedding embed{nullptr};
  TransformerEncoder transformer{nullptr};
  SkipRefiner skip_da{nullptr};
  Decoder dec{nullptr};
  nn::Conv2d head{nullptr};

 private:
  ModelConfig config_;
};
TORCH_MODULE(FmdTransUNet);

/// Validates the config, instantiates exactly the blocks its variant needs and
/// seeds every parameter from (config.seed, parameter path). With a weight
/// file, every tensor in it is then copied onto the parameter of the same
/// path; tensors under the reserved "state." prefix are ignored and model
/// parameters absent from the file keep their seeded values.
/// Throws ConfigError, or WeightLoadError for unreadable files, unknown
/// parameter names and shape mismatches.
FmdTransUNet build_variant(const ModelConfig& config,
                           const std::optional<std::filesystem::path>& weights = std::nullopt);

/// Copies named tensors onto matching parameters (see build_variant).
void load_weights(torch::nn::Module& model, const std::map<std::string, torch::Tensor>& tensors,
                  std::string_view source);

}  // namespace fmdseg::network
