// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/network/model.hpp"

#include <sstream>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/network/archive.hpp"
#include "fmdseg/nn/seeding.hpp"

namespace fmdseg::network {

namespace {

constexpr std::int64_t kBottleneckSide = kImageSize / kStemStride;

StemOptions stem_options(const ModelConfig& c) {
  StemOptions o;
  o.in_channels = c.stem_in_channels;
  for (std::size_t i = 0; i < 4; ++i) o.widths[i] = c.stem_widths[i];
  for (std::size_t i = 0; i < 3; ++i) o.units[i] = c.stem_units[i];
  return o;
}

}  // namespace

SkipRefinerImpl::SkipRefinerImpl(const ModelConfig& config) {
  const auto set = config.skip_layers();
  for (int k = 1; k <= 3; ++k) {
    const auto level = config.skip_level(k);
    levels_[static_cast<std::size_t>(k - 1)] = level;
    if (!set.contains(k)) continue;
    layer(k) = register_module("layer" + std::to_string(k),
                               da_plus::DaPlusBlock(da_plus::DaPlusOptions(config.skip_width(level))
                                                        .reduction(config.attention_reduction)));
  }
}

std::array<torch::Tensor, 3> SkipRefinerImpl::forward(const std::array<torch::Tensor, 3>& skips,
                                                      const ActivationProbe* probe) {
  auto out = skips;
  for (int k = 1; k <= 3; ++k) {
    const auto level = static_cast<std::size_t>(levels_[static_cast<std::size_t>(k - 1)]);
    const auto name = "skip" + std::to_string(k);
    if (auto& block = layer(k)) {
      out[level] = block->forward(skips[level], probe, "skip_da.layer" + std::to_string(k));
    }
    emit(probe, name + ".out", out[level]);
  }
  return out;
}

FmdTransUNetImpl::FmdTransUNetImpl(const ModelConfig& config) : config_(validate_config(config)) {
  const auto& c = config_;
  const auto bottleneck_width = c.stem_widths[3];
  stem = register_module("stem", ConvStem(stem_options(c)));
  if (uses_mewb(c.variant)) {
    enc_mewb = register_module(
        "enc_mewb", mewb::MewbBlock(mewb::MewbOptions(bottleneck_width, kBottleneckSide, kBottleneckSide)
                                        .groups(c.group_norm_groups)
                                        .ffn_expansion(c.ffn_expansion)));
  }
  if (uses_da_plus(c.variant)) {
    enc_da = register_module("enc_da", da_plus::DaPlusBlock(da_plus::DaPlusOptions(bottleneck_width)
                                                                .reduction(c.attention_reduction)));
  }
  embed = register_module("embed", PatchEmbedding(bottleneck_width, c.hidden_dim, c.patch_size));
  transformer = register_module(
      "transformer", TransformerEncoder(c.transformer_layers, c.hidden_dim, c.transformer_heads, c.ffn_expansion));
  skip_da = register_module("skip_da", SkipRefiner(c));

  DecoderOptions d;
  d.hidden = c.hidden_dim;
  d.token_grid = c.token_grid();
  d.head_width = c.decoder_head_width;
  for (std::size_t i = 0; i < 4; ++i) d.widths[i] = c.decoder_widths[i];
  d.skip_widths = {c.stem_widths[2], c.stem_widths[1], c.stem_widths[0]};
  d.use_mewb = uses_mewb(c.variant);
  d.mewb_groups = c.group_norm_groups;
  d.ffn_expansion = c.ffn_expansion;
  dec = register_module("dec", Decoder(d));
  head = register_module("head", nn::Conv2d(nn::ConvOptions(c.decoder_widths[3], c.num_classes, 1)));
}

EncoderFeatures FmdTransUNetImpl::encode(const torch::Tensor& images, const ActivationProbe* probe) {
  auto s = stem->forward(images);
  for (std::size_t i = 0; i < 3; ++i) emit(probe, "stem.skip" + std::to_string(i + 1), s.skips[i]);
  emit(probe, "stem.out", s.features);
  auto x = s.features;
  if (enc_mewb) x = enc_mewb->forward(x, probe, "enc_mewb");
  if (enc_da) x = enc_da->forward(x, probe, "enc_da");
  auto tokens = embed->forward(x);
  emit(probe, "embed.tokens", tokens);
  tokens = transformer->forward(tokens);
  emit(probe, "transformer.out", tokens);
  return {s.skips, tokens};
}

std::array<torch::Tensor, 3> FmdTransUNetImpl::refine_skips(const std::array<torch::Tensor, 3>& skips,
                                                            const ActivationProbe* probe) {
  return skip_da->forward(skips, probe);
}

torch::Tensor FmdTransUNetImpl::decode(const EncoderFeatures& features, const ActivationProbe* probe) {
  const auto logits = head->forward(dec->forward(features.bottleneck, features.skips, probe));
  emit(probe, "logits", logits);
  return logits;
}

torch::Tensor FmdTransUNetImpl::forward(const torch::Tensor& images, const ActivationProbe* probe) {
  auto features = encode(images, probe);
  features.skips = refine_skips(features.skips, probe);
  return decode(features, probe);
}

void load_weights(torch::nn::Module& model, const std::map<std::string, torch::Tensor>& tensors,
                  std::string_view source) {
  torch::NoGradGuard no_grad;
  auto params = model.named_parameters();
  for (const auto& [name, value] : tensors) {
    if (name.rfind("state.", 0) == 0) continue;
    auto* target = params.find(name);
    if (target == nullptr) {
      throw WeightLoadError(std::string(source) + ": no parameter named '" + name + "' in this model");
    }
    if (target->sizes() != value.sizes()) {
      std::ostringstream msg;
      msg << source << ": '" << name << "' has shape " << value.sizes() << ", model expects " << target->sizes();
      throw WeightLoadError(msg.str());
    }
    if (!value.is_floating_point()) {
      throw WeightLoadError(std::string(source) + ": '" + name + "' is not a floating-point tensor");
    }
    target->copy_(value);
  }
}

FmdTransUNet build_variant(const ModelConfig& config, const std::optional<std::filesystem::path>& weights) {
  FmdTransUNet model(config);
  nn::seed_parameters(*model, model->config().seed);
  if (weights) {
    TensorArchive archive;
    try {
      archive = read_archive(*weights);
    } catch (const Error& e) {
      throw WeightLoadError(std::string("weight file: ") + e.what());
    }
    load_weights(*model, archive.tensors, weights->string());
  }
  return model;
}

}  // namespace fmdseg::network
