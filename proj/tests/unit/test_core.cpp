// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include "doctest.h"
#include "fmdseg/core/config.hpp"
#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/feature_map.hpp"
#include "fmdseg/core/organ.hpp"
#include "fmdseg/network/model.hpp"

using namespace fmdseg;

TEST_SUITE("core") {
  TEST_CASE("organ vocabulary has nine classes in fixed order") {
    CHECK(kNumClasses == 9);
    CHECK(kNumOrgans == 8);
    CHECK(organ_id(Organ::background) == 0);
    const char* names[] = {"aorta", "gallbladder", "kidney_left", "kidney_right",
                           "liver", "pancreas",    "spleen",      "stomach"};
    for (int i = 0; i < kNumOrgans; ++i) {
      CHECK(organ_id(kOrgans[static_cast<std::size_t>(i)]) == i + 1);
      CHECK(organ_name(kOrgans[static_cast<std::size_t>(i)]) == names[i]);
      CHECK(organ_from_name(names[i]) == kOrgans[static_cast<std::size_t>(i)]);
      CHECK(organ_from_id(i + 1) == kOrgans[static_cast<std::size_t>(i)]);
    }
    CHECK_FALSE(organ_from_id(9).has_value());
    CHECK_FALSE(organ_from_name("colon").has_value());
    CHECK_FALSE(is_valid_label(-1));
    CHECK_FALSE(is_valid_label(9));
  }

  TEST_CASE("full defaults validate with all skip layers") {
    const auto c = validate_config(ModelConfig{});
    CHECK(c.variant == Variant::full);
    CHECK(c.skip_da_layers == SkipLayerSet::all());
    CHECK(c.patch_size == 16);
    CHECK(c.transformer_layers == 12);
    CHECK(c.hidden_dim == 768);
    CHECK(c.num_classes == 9);
    CHECK(c.group_norm_groups == 4);
    CHECK(c.ffn_expansion == 4);
    CHECK(c.attention_reduction == 8);
    CHECK(c.optimizer.learning_rate == 0.01);
    CHECK(c.optimizer.momentum == 0.9);
    CHECK(c.optimizer.weight_decay == 1e-4);
    CHECK(c.optimizer.batch_size == 6);
    CHECK(c.optimizer.max_epochs == 200);
    CHECK(c.loss_weights == LossWeights{0.6, 0.4});
  }

  TEST_CASE("variant defaults for skip layers") {
    for (auto v : {Variant::baseline, Variant::only_mewb}) {
      ModelConfig c;
      c.variant = v;
      CHECK(validate_config(c).skip_da_layers == SkipLayerSet::none());
    }
    ModelConfig c;
    c.variant = Variant::only_da_plus;
    CHECK(validate_config(c).skip_da_layers == SkipLayerSet::all());
  }

  TEST_CASE("invariant violations raise ConfigError") {
    auto bad = [](auto mutate) {
      ModelConfig c;
      mutate(c);
      CHECK_THROWS_AS(validate_config(c), ConfigError);
    };
    bad([](ModelConfig& c) { c.loss_weights = {0.6, 0.6}; });
    bad([](ModelConfig& c) { c.loss_weights = {1.2, -0.2}; });
    bad([](ModelConfig& c) { c.num_classes = 8; });
    bad([](ModelConfig& c) { c.patch_size = 15; });
    bad([](ModelConfig& c) { c.hidden_dim = 770; });
    bad([](ModelConfig& c) { c.optimizer.batch_size = 0; });
    bad([](ModelConfig& c) { c.optimizer.learning_rate = 0.0; });
    bad([](ModelConfig& c) {
      c.variant = Variant::baseline;
      c.skip_da_layers = SkipLayerSet::first(1);
    });
    bad([](ModelConfig& c) {
      c.variant = Variant::only_mewb;
      c.skip_da_layers = SkipLayerSet::all();
    });
    bad([](ModelConfig& c) { c.augment.flip_prob = 1.5; });
    bad([](ModelConfig& c) {
      c.augment.contrast_min = 1.3;
      c.augment.contrast_max = 1.2;
    });
  }

  TEST_CASE("default loss weights are accepted") {
    ModelConfig c;
    c.loss_weights = {0.6, 0.4};
    CHECK_NOTHROW(validate_config(c));
  }

  TEST_CASE("ConfigError names the violated invariant") {
    ModelConfig c;
    c.loss_weights = {0.6, 0.6};
    try {
      validate_config(c);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("w_c") != std::string::npos);
    }
  }

  TEST_CASE("skip layer set parsing and formatting") {
    CHECK(SkipLayerSet::parse("none") == SkipLayerSet::none());
    CHECK(SkipLayerSet::parse("") == SkipLayerSet::none());
    CHECK(SkipLayerSet::parse("1,2,3") == SkipLayerSet::all());
    CHECK(SkipLayerSet::parse("3, 1") == SkipLayerSet::from_mask(0b101));
    CHECK(SkipLayerSet::all().to_string() == "1,2,3");
    CHECK(SkipLayerSet::none().to_string() == "none");
    CHECK(SkipLayerSet::first(2).size() == 2);
    CHECK_THROWS_AS(SkipLayerSet::parse("4"), ConfigError);
    CHECK_THROWS_AS(SkipLayerSet::parse("x"), ConfigError);
  }

  TEST_CASE("config text round trip is field for field") {
    ModelConfig c = desk_config();
    c.variant = Variant::only_da_plus;
    c.skip_da_layers = SkipLayerSet::from_mask(0b110);
    c.skip_layer_order = SkipOrder::deep_first;
    c.loss_weights = {0.7, 0.3};
    c.optimizer.learning_rate = 0.0321;
    c.optimizer.max_steps = 77;
    c.optimizer.schedule = LrSchedule::constant;
    c.augment.enabled = false;
    c.augment.noise_sigma = 0.123456789012345;
    c.seed = 987654321012345ull;
    const auto text = format_config(c);
    CHECK(parse_config(text) == c);
    CHECK(parse_config(format_config(ModelConfig{})) == ModelConfig{});
  }

  TEST_CASE("config file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "fmdseg_core_cfg.cfg";
    const auto c = desk_config();
    save_config_file(c, path);
    // Loading validates, which fills the variant default skip set.
    CHECK(load_config_file(path) == validate_config(c));
    std::filesystem::remove(path);
  }

  TEST_CASE("config parser rejects unknown keys and malformed lines") {
    CHECK_THROWS_AS(parse_config("no_such_key = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("patch_size 16"), ConfigError);
    CHECK_THROWS_AS(parse_config("patch_size = sixteen"), ConfigError);
    CHECK_THROWS_AS(parse_config("variant = medium"), ConfigError);
    CHECK(parse_config("# comment only\n\n").variant == Variant::full);
    CHECK(parse_config("preset = desk").hidden_dim == desk_config().hidden_dim);
  }

  TEST_CASE("same_architecture ignores training hyperparameters") {
    auto a = validate_config(desk_config());
    auto b = a;
    b.optimizer.learning_rate = 0.5;
    b.loss_weights = {0.5, 0.5};
    b.seed = 99;
    CHECK(same_architecture(a, b));
    b.variant = Variant::baseline;
    b.skip_da_layers = SkipLayerSet::none();
    CHECK_FALSE(same_architecture(a, b));
  }

  TEST_CASE("skip layer order maps layer ids onto encoder levels") {
    ModelConfig c;
    CHECK(c.skip_level(1) == 0);
    CHECK(c.skip_level(3) == 2);
    c.skip_layer_order = SkipOrder::deep_first;
    CHECK(c.skip_level(1) == 2);
    CHECK(c.skip_level(3) == 0);
  }

  TEST_CASE("every accepted config instantiates a model") {
    for (auto v : {Variant::baseline, Variant::only_mewb, Variant::only_da_plus, Variant::full}) {
      for (int mask = 0; mask < 8; ++mask) {
        auto c = desk_config();
        c.variant = v;
        c.skip_da_layers = SkipLayerSet::from_mask(static_cast<std::uint8_t>(mask));
        ModelConfig valid;
        try {
          valid = validate_config(c);
        } catch (const ConfigError&) {
          CHECK_FALSE(uses_da_plus(v));
          continue;
        }
        CHECK_NOTHROW(network::build_variant(valid));
      }
    }
  }

  TEST_CASE("feature map contract") {
    CHECK_NOTHROW(require_feature_map(torch::zeros({1, 1, 1, 1}), "t"));
    CHECK_THROWS_AS(require_feature_map(torch::zeros({1, 1, 1}), "t"), ShapeError);
    CHECK_THROWS_AS(require_feature_map(torch::zeros({1, 0, 2, 2}), "t"), ShapeError);
    CHECK_THROWS_AS(require_channels(torch::zeros({1, 3, 2, 2}), 4, "t"), ShapeError);
    CHECK(all_finite(torch::zeros({2, 2})));
    auto x = torch::zeros({2, 2});
    x[0][1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_FALSE(all_finite(x));
    CHECK(probe_name("", "a") == "a");
    CHECK(probe_name("p", "a") == "p.a");
  }

  TEST_CASE("exit codes by error family") {
    CHECK(exit_code_for(ConfigError("x")) == 1);
    CHECK(exit_code_for(ConfigMismatchError("x")) == 1);
    CHECK(exit_code_for(FormatError("x")) == 2);
    CHECK(exit_code_for(LabelRangeError("x", 3)) == 2);
    CHECK(exit_code_for(DivergenceError("x", 1, "")) == 3);
  }
}
