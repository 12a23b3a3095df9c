// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "fmdseg/core/organ.hpp"

namespace fmdseg {

inline constexpr int kImageSize = 224;
inline constexpr int kStemStride = 16;

/// Ablation variants: which of the two added blocks are instantiated.
enum class Variant { baseline, only_mewb, only_da_plus, full };

constexpr bool uses_mewb(Variant v) noexcept { return v == Variant::only_mewb || v == Variant::full; }
constexpr bool uses_da_plus(Variant v) noexcept {
  return v == Variant::only_da_plus || v == Variant::full;
}

std::string_view to_string(Variant v) noexcept;
std::optional<Variant> variant_from_string(std::string_view s) noexcept;

/// Subset of the three skip connections {1,2,3} refined by a DA+ block.
class SkipLayerSet {
 public:
  constexpr SkipLayerSet() = default;
  static constexpr SkipLayerSet all() { return SkipLayerSet(0b111); }
  static constexpr SkipLayerSet none() { return SkipLayerSet(0); }
  /// Layers 1..n, the progressive subsets of the skip-layer ablation.
  static constexpr SkipLayerSet first(int n) {
    return SkipLayerSet(static_cast<std::uint8_t>((1u << n) - 1u));
  }
  static constexpr SkipLayerSet from_mask(std::uint8_t mask) { return SkipLayerSet(mask & 0b111); }

  constexpr bool contains(int layer) const noexcept {
    return layer >= 1 && layer <= 3 && (mask_ >> (layer - 1)) & 1u;
  }
  void insert(int layer);
  constexpr bool empty() const noexcept { return mask_ == 0; }
  constexpr std::uint8_t mask() const noexcept { return mask_; }
  int size() const noexcept;

  /// "1,2,3"; the empty set formats as "none".
  std::string to_string() const;
  /// Accepts "none", "" or a comma list of layer ids.
  static SkipLayerSet parse(std::string_view text);

  friend constexpr bool operator==(SkipLayerSet a, SkipLayerSet b) noexcept {
    return a.mask_ == b.mask_;
  }

 private:
  constexpr explicit SkipLayerSet(std::uint8_t mask) : mask_(mask) {}
  std::uint8_t mask_ = 0;
};

/// How "layer k" in skip_da_layers maps onto encoder resolutions.
enum class SkipOrder { shallow_first, deep_first };

enum class LrSchedule { constant, poly };

struct LossWeights {
  double w_c = 0.6;
  double w_d = 0.4;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct OptimizerConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int batch_size = 6;
  int max_epochs = 200;
  // 0 derives the step budget from max_epochs and the dataset size.
  std::int64_t max_steps = 0;
  LrSchedule schedule = LrSchedule::poly;
  double poly_power = 0.9;
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct AugmentationConfig {
  bool enabled = true;
  double rotation_max_deg = 20.0;
  double flip_prob = 0.5;
  // Standard deviation as a fraction of the normalized intensity range.
  double noise_sigma = 0.01;
  double contrast_min = 0.8;
  double contrast_max = 1.2;
  friend bool operator==(const AugmentationConfig&, const AugmentationConfig&) = default;
};

/// Architecture, variant and training hyperparameters for one run.
///
/// Defaults follow the R50-ViT-B/16 hybrid layout at 224x224. Use
/// desk_config() for a reduced-width preset that trains on a CPU.
struct ModelConfig {
  Variant variant = Variant::full;
  // Unset means "variant default": {1,2,3} when DA+ is used, none otherwise.
  std::optional<SkipLayerSet> skip_da_layers;
  SkipOrder skip_layer_order = SkipOrder::shallow_first;

  int patch_size = 16;
  int transformer_layers = 12;
  int hidden_dim = 768;
  int transformer_heads = 12;
  int num_classes = kNumClasses;
  int group_norm_groups = 4;
  int ffn_expansion = 4;
  int attention_reduction = 8;

  // Conv stem: root width then the three downsampling stages (strides 4, 8, 16).
  int stem_in_channels = 3;
  std::array<int, 4> stem_widths = {64, 256, 512, 1024};
  std::array<int, 3> stem_units = {3, 4, 9};
  int decoder_head_width = 512;
  std::array<int, 4> decoder_widths = {256, 128, 64, 16};

  LossWeights loss_weights;
  OptimizerConfig optimizer;
  AugmentationConfig augment;
  std::uint64_t seed = 1234;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;

  /// Skip subset after validation; variant default when unset.
  SkipLayerSet skip_layers() const;
  /// Token grid side length (224 / patch_size).
  int token_grid() const noexcept { return kImageSize / patch_size; }
  /// Channel width of the skip feature at encoder level 0 (1/2), 1 (1/4), 2 (1/8).
  int skip_width(int level) const noexcept { return stem_widths[static_cast<std::size_t>(level)]; }
  /// Encoder level refined by DA+ for skip layer id 1..3.
  int skip_level(int layer) const noexcept;
};

/// Reduced-width preset: same topology, small enough for CPU training.
ModelConfig desk_config();

/// Checks every type invariant and fills variant defaults. Throws ConfigError
/// naming the violated invariant.
ModelConfig validate_config(ModelConfig config);

/// Ignores everything except the fields that shape the parameter set.
bool same_architecture(const ModelConfig& a, const ModelConfig& b) noexcept;

/// Flat `key = value` document, one entry per line, `#` comments.
std::string format_config(const ModelConfig& config);
ModelConfig parse_config(std::string_view text);
ModelConfig load_config_file(const std::filesystem::path& path);
void save_config_file(const ModelConfig& config, const std::filesystem::path& path);

}  // namespace fmdseg
