// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/core/config.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "fmdseg/core/errors.hpp"

namespace fmdseg {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(text) +
                      "' as a number");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true/false, got '" +
                    std::string(text) + "'");
}

template <std::size_t N>
std::array<int, N> parse_int_list(std::string_view key, std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != N) {
    throw ConfigError("config key '" + std::string(key) + "': expected " + std::to_string(N) +
                      " comma-separated integers");
  }
  std::array<int, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = parse_number<int>(key, parts[i]);
  return out;
}

template <std::size_t N>
std::string format_int_list(const std::array<int, N>& values) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

void require(bool ok, const std::string& invariant) {
  if (!ok) throw ConfigError("invalid config: " + invariant);
}

using Setter = std::function<void(ModelConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["variant"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      const auto parsed = variant_from_string(v);
      if (!parsed) throw ConfigError("config key '" + std::string(k) + "': unknown variant '" + std::string(v) + "'");
      c.variant = *parsed;
    };
    t["skip_da_layers"] = [](ModelConfig& c, std::string_view, std::string_view v) {
      c.skip_da_layers = SkipLayerSet::parse(v);
    };
    t["skip_layer_order"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      if (v == "shallow_first") c.skip_layer_order = SkipOrder::shallow_first;
      else if (v == "deep_first") c.skip_layer_order = SkipOrder::deep_first;
      else throw ConfigError("config key '" + std::string(k) + "': expected shallow_first or deep_first");
    };
    auto int_field = [&t](const char* name, int ModelConfig::*field) {
      t[name] = [field](ModelConfig& c, std::string_view k, std::string_view v) {
        c.*field = parse_number<int>(k, v);
      };
    };
    int_field("patch_size", &ModelConfig::patch_size);
    int_field("transformer_layers", &ModelConfig::transformer_layers);
    int_field("hidden_dim", &ModelConfig::hidden_dim);
    int_field("transformer_heads", &ModelConfig::transformer_heads);
    int_field("num_classes", &ModelConfig::num_classes);
    int_field("group_norm_groups", &ModelConfig::group_norm_groups);
    int_field("ffn_expansion", &ModelConfig::ffn_expansion);
    int_field("attention_reduction", &ModelConfig::attention_reduction);
    int_field("stem_in_channels", &ModelConfig::stem_in_channels);
    int_field("decoder_head_width", &ModelConfig::decoder_head_width);
    t["stem_widths"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.stem_widths = parse_int_list<4>(k, v);
    };
    t["stem_units"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.stem_units = parse_int_list<3>(k, v);
    };
    t["decoder_widths"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.decoder_widths = parse_int_list<4>(k, v);
    };
    t["loss_weights.w_c"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.loss_weights.w_c = parse_number<double>(k, v);
    };
    t["loss_weights.w_d"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.loss_weights.w_d = parse_number<double>(k, v);
    };
    auto opt_double = [&t](const char* name, double OptimizerConfig::*field) {
      t[name] = [field](ModelConfig& c, std::string_view k, std::string_view v) {
        c.optimizer.*field = parse_number<double>(k, v);
      };
    };
    opt_double("optimizer.learning_rate", &OptimizerConfig::learning_rate);
    opt_double("optimizer.momentum", &OptimizerConfig::momentum);
    opt_double("optimizer.weight_decay", &OptimizerConfig::weight_decay);
    opt_double("optimizer.poly_power", &OptimizerConfig::poly_power);
    t["optimizer.batch_size"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.optimizer.batch_size = parse_number<int>(k, v);
    };
    t["optimizer.max_epochs"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.optimizer.max_epochs = parse_number<int>(k, v);
    };
    t["optimizer.max_steps"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.optimizer.max_steps = parse_number<std::int64_t>(k, v);
    };
    t["optimizer.schedule"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      if (v == "poly") c.optimizer.schedule = LrSchedule::poly;
      else if (v == "constant") c.optimizer.schedule = LrSchedule::constant;
      else throw ConfigError("config key '" + std::string(k) + "': expected poly or constant");
    };
    auto aug_double = [&t](const char* name, double AugmentationConfig::*field) {
      t[name] = [field](ModelConfig& c, std::string_view k, std::string_view v) {
        c.augment.*field = parse_number<double>(k, v);
      };
    };
    t["augment.enabled"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.augment.enabled = parse_bool(k, v);
    };
    aug_double("augment.rotation_max_deg", &AugmentationConfig::rotation_max_deg);
    aug_double("augment.flip_prob", &AugmentationConfig::flip_prob);
    aug_double("augment.noise_sigma", &AugmentationConfig::noise_sigma);
    aug_double("augment.contrast_min", &AugmentationConfig::contrast_min);
    aug_double("augment.contrast_max", &AugmentationConfig::contrast_max);
    t["seed"] = [](ModelConfig& c, std::string_view k, std::string_view v) {
      c.seed = parse_number<std::uint64_t>(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::only_mewb: return "only_mewb";
    case Variant::only_da_plus: return "only_da_plus";
    case Variant::full: return "full";
  }
  return "unknown";
}

std::optional<Variant> variant_from_string(std::string_view s) noexcept {
  for (auto v : {Variant::baseline, Variant::only_mewb, Variant::only_da_plus, Variant::full}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

void SkipLayerSet::insert(int layer) {
  if (layer < 1 || layer > 3) {
    throw ConfigError("skip_da_layers: layer " + std::to_string(layer) + " outside {1,2,3}");
  }
  mask_ = static_cast<std::uint8_t>(mask_ | (1u << (layer - 1)));
}

int SkipLayerSet::size() const noexcept { return std::popcount(mask_); }

std::string SkipLayerSet::to_string() const {
  if (empty()) return "none";
  std::string out;
  for (int layer = 1; layer <= 3; ++layer) {
    if (!contains(layer)) continue;
    if (!out.empty()) out += ',';
    out += std::to_string(layer);
  }
  return out;
}

SkipLayerSet SkipLayerSet::parse(std::string_view text) {
  text = trim(text);
  SkipLayerSet out;
  if (text.empty() || text == "none") return out;
  for (auto part : split(text, ',')) {
    out.insert(parse_number<int>("skip_da_layers", part));
  }
  return out;
}

SkipLayerSet ModelConfig::skip_layers() const {
  if (skip_da_layers) return *skip_da_layers;
  return uses_da_plus(variant) ? SkipLayerSet::all() : SkipLayerSet::none();
}

int ModelConfig::skip_level(int layer) const noexcept {
  return skip_layer_order == SkipOrder::shallow_first ? layer - 1 : 3 - layer;
}

ModelConfig desk_config() {
  ModelConfig c;
  c.transformer_layers = 2;
  c.hidden_dim = 64;
  c.transformer_heads = 4;
  c.stem_in_channels = 1;
  c.stem_widths = {16, 32, 64, 128};
  c.stem_units = {1, 1, 1};
  c.decoder_head_width = 128;
  c.decoder_widths = {64, 32, 16, 16};
  return c;
}

ModelConfig validate_config(ModelConfig c) {
  require(c.num_classes == kNumClasses, "num_classes must be 9 (background + 8 organs)");
  require(c.patch_size > 0 && kImageSize % c.patch_size == 0, "patch_size must divide 224");
  require(c.patch_size % kStemStride == 0,
          "patch_size must be a multiple of the conv stem stride 16");
  require(c.transformer_layers >= 1, "transformer_layers must be >= 1");
  require(c.hidden_dim >= 1 && c.transformer_heads >= 1, "hidden_dim and transformer_heads must be positive");
  require(c.hidden_dim % c.transformer_heads == 0, "hidden_dim must be divisible by transformer_heads");
  require(c.group_norm_groups >= 1, "group_norm_groups must be >= 1");
  require(c.ffn_expansion >= 1, "ffn_expansion must be >= 1");
  require(c.attention_reduction >= 1, "attention_reduction must be >= 1");
  require(c.stem_in_channels == 1 || c.stem_in_channels == 3, "stem_in_channels must be 1 or 3");
  for (int w : c.stem_widths) require(w >= 1, "stem_widths must be positive");
  for (std::size_t i = 1; i < c.stem_widths.size(); ++i) {
    require(c.stem_widths[i] > c.stem_widths[i - 1], "stem_widths must strictly increase");
  }
  for (int u : c.stem_units) require(u >= 1, "stem_units must be >= 1");
  require(c.decoder_head_width >= 1, "decoder_head_width must be positive");
  for (int w : c.decoder_widths) require(w >= 1, "decoder_widths must be positive");

  if (uses_mewb(c.variant)) {
    auto check_mewb = [&](int channels, const std::string& where) {
      require(channels % 4 == 0, where + " width " + std::to_string(channels) +
                                     " must be divisible by 4 (MEWB branch split)");
      require(channels % c.group_norm_groups == 0,
              where + " width " + std::to_string(channels) + " must be divisible by group_norm_groups");
    };
    check_mewb(c.stem_widths[3], "encoder MEWB");
    for (int i = 0; i < 3; ++i) check_mewb(c.decoder_widths[static_cast<std::size_t>(i)], "decoder stage " + std::to_string(i + 1) + " MEWB");
  }

  if (c.skip_da_layers && !c.skip_da_layers->empty()) {
    require(uses_da_plus(c.variant), "variant " + std::string(to_string(c.variant)) +
                                         " has no DA+ blocks, so skip_da_layers must be empty");
  }
  c.skip_da_layers = c.skip_layers();
  if (uses_da_plus(c.variant)) {
    require(c.stem_widths[3] % c.attention_reduction == 0,
            "encoder DA+ width must be divisible by attention_reduction");
    for (int layer = 1; layer <= 3; ++layer) {
      if (!c.skip_da_layers->contains(layer)) continue;
      require(c.skip_width(c.skip_level(layer)) % c.attention_reduction == 0,
              "skip layer " + std::to_string(layer) + " width must be divisible by attention_reduction");
    }
  }

  const auto& w = c.loss_weights;
  require(w.w_c >= 0.0 && w.w_c <= 1.0 && w.w_d >= 0.0 && w.w_d <= 1.0, "loss weights must lie in [0,1]");
  require(std::abs(w.w_c + w.w_d - 1.0) <= 1e-9, "loss weights w_c + w_d must equal 1");

  const auto& o = c.optimizer;
  require(o.learning_rate > 0.0, "optimizer.learning_rate must be positive");
  require(o.momentum >= 0.0 && o.momentum < 1.0, "optimizer.momentum must lie in [0,1)");
  require(o.weight_decay >= 0.0, "optimizer.weight_decay must be non-negative");
  require(o.batch_size >= 1, "optimizer.batch_size must be >= 1");
  require(o.max_epochs >= 1, "optimizer.max_epochs must be >= 1");
  require(o.max_steps >= 0, "optimizer.max_steps must be non-negative");
  require(o.poly_power > 0.0, "optimizer.poly_power must be positive");

  const auto& a = c.augment;
  require(a.rotation_max_deg >= 0.0, "augment.rotation_max_deg must be non-negative");
  require(a.flip_prob >= 0.0 && a.flip_prob <= 1.0, "augment.flip_prob must lie in [0,1]");
  require(a.noise_sigma >= 0.0, "augment.noise_sigma must be non-negative");
  require(a.contrast_min > 0.0 && a.contrast_min <= a.contrast_max,
          "augment contrast range must be ordered and positive");
  return c;
}

bool same_architecture(const ModelConfig& a, const ModelConfig& b) noexcept {
  return a.variant == b.variant && a.skip_layers() == b.skip_layers() &&
         a.skip_layer_order == b.skip_layer_order && a.patch_size == b.patch_size &&
         a.transformer_layers == b.transformer_layers && a.hidden_dim == b.hidden_dim &&
         a.transformer_heads == b.transformer_heads && a.num_classes == b.num_classes &&
         a.group_norm_groups == b.group_norm_groups && a.ffn_expansion == b.ffn_expansion &&
         a.attention_reduction == b.attention_reduction && a.stem_in_channels == b.stem_in_channels &&
         a.stem_widths == b.stem_widths && a.stem_units == b.stem_units &&
         a.decoder_head_width == b.decoder_head_width && a.decoder_widths == b.decoder_widths;
}

std::string format_config(const ModelConfig& c) {
  std::ostringstream out;
  out << "variant = " << to_string(c.variant) << '\n';
  if (c.skip_da_layers) out << "skip_da_layers = " << c.skip_da_layers->to_string() << '\n';
  out << "skip_layer_order = "
      << (c.skip_layer_order == SkipOrder::shallow_first ? "shallow_first" : "deep_first") << '\n';
  out << "patch_size = " << c.patch_size << '\n';
  out << "transformer_layers = " << c.transformer_layers << '\n';
  out << "hidden_dim = " << c.hidden_dim << '\n';
  out << "transformer_heads = " << c.transformer_heads << '\n';
  out << "num_classes = " << c.num_classes << '\n';
  out << "group_norm_groups = " << c.group_norm_groups << '\n';
  out << "ffn_expansion = " << c.ffn_expansion << '\n';
  out << "attention_reduction = " << c.attention_reduction << '\n';
  out << "stem_in_channels = " << c.stem_in_channels << '\n';
  out << "stem_widths = " << format_int_list(c.stem_widths) << '\n';
  out << "stem_units = " << format_int_list(c.stem_units) << '\n';
  out << "decoder_head_width = " << c.decoder_head_width << '\n';
  out << "decoder_widths = " << format_int_list(c.decoder_widths) << '\n';
  out << "loss_weights.w_c = " << format_double(c.loss_weights.w_c) << '\n';
  out << "loss_weights.w_d = " << format_double(c.loss_weights.w_d) << '\n';
  const auto& o = c.optimizer;
  out << "optimizer.learning_rate = " << format_double(o.learning_rate) << '\n';
  out << "optimizer.momentum = " << format_double(o.momentum) << '\n';
  out << "optimizer.weight_decay = " << format_double(o.weight_decay) << '\n';
  out << "optimizer.batch_size = " << o.batch_size << '\n';
  out << "optimizer.max_epochs = " << o.max_epochs << '\n';
  out << "optimizer.max_steps = " << o.max_steps << '\n';
  out << "optimizer.schedule = " << (o.schedule == LrSchedule::poly ? "poly" : "constant") << '\n';
  out << "optimizer.poly_power = " << format_double(o.poly_power) << '\n';
  const auto& a = c.augment;
  out << "augment.enabled = " << (a.enabled ? "true" : "false") << '\n';
  out << "augment.rotation_max_deg = " << format_double(a.rotation_max_deg) << '\n';
  out << "augment.flip_prob = " << format_double(a.flip_prob) << '\n';
  out << "augment.noise_sigma = " << format_double(a.noise_sigma) << '\n';
  out << "augment.contrast_min = " << format_double(a.contrast_min) << '\n';
  out << "augment.contrast_max = " << format_double(a.contrast_max) << '\n';
  out << "seed = " << c.seed << '\n';
  return out.str();
}

ModelConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string_view preset;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      const auto key = trim(line.substr(0, eq));
      const auto value = trim(line.substr(eq + 1));
      if (key == "preset") {
        preset = value;
      } else {
        entries.emplace_back(std::string(key), std::string(value));
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }

  ModelConfig config;
  if (preset == "desk") {
    config = desk_config();
  } else if (!preset.empty() && preset != "reference") {
    throw ConfigError("unknown preset '" + std::string(preset) + "'");
  }
  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(config, key, value);
  }
  return config;
}

ModelConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return validate_config(parse_config(buffer.str()));
}

void save_config_file(const ModelConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write config file " + path.string());
  out << format_config(config);
}

}  // namespace fmdseg
