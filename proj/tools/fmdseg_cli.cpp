// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

// fmdseg: train, evaluate, ablate and sweep FMD-TransUNet variants.
// Without --data every command runs on an in-process synthetic phantom.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fmdseg/core/config.hpp"
#include "fmdseg/core/errors.hpp"
#include "fmdseg/data/phantom.hpp"
#include "fmdseg/data/volume.hpp"
#include "fmdseg/harness/ablate.hpp"
#include "fmdseg/harness/checkpoint.hpp"
#include "fmdseg/harness/evaluate.hpp"
#include "fmdseg/harness/experiment.hpp"
#include "fmdseg/harness/sweep.hpp"
#include "fmdseg/harness/train.hpp"

namespace fs = std::filesystem;
using namespace fmdseg;

namespace {

struct DataArgs {
  std::string data;
  std::string split;
  int phantom_train = 4;
  int phantom_test = 2;
  std::uint64_t phantom_seed = 7;

  void add(CLI::App* app) {
    app->add_option("--data", data, "Dataset root holding cases/<id>/");
    app->add_option("--split", split, "Split directory with train.txt and test.txt (default <data>/splits)");
    app->add_option("--phantom-train", phantom_train, "Phantom training cases when --data is absent");
    app->add_option("--phantom-test", phantom_test, "Phantom test cases when --data is absent");
    app->add_option("--phantom-seed", phantom_seed, "Phantom seed when --data is absent");
  }

  harness::ExperimentData load(const std::string& split_override = {}) const {
    if (data.empty()) return harness::phantom_experiment_data(phantom_train, phantom_test, phantom_seed);
    fs::path split_dir = !split.empty() ? fs::path(split) : !split_override.empty() ? fs::path(split_override)
                                                                                   : fs::path(data) / "splits";
    return harness::load_experiment_data(data, split_dir);
  }
};

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--config", path, "Config file (key = value); the desk preset when absent");
    app->add_option("--set", overrides, "Override one config entry, e.g. --set optimizer.max_steps=50");
    app->add_option("--seed", seed, "Override the run seed");
  }

  bool given() const { return !path.empty() || !overrides.empty() || seed.has_value(); }

  ModelConfig load() const {
    ModelConfig c = path.empty() ? desk_config() : load_config_file(path);
    if (!overrides.empty()) {
      std::string text = format_config(c);
      for (const auto& o : overrides) text += "\n" + o;
      c = parse_config(text);
    }
    if (seed) c.seed = *seed;
    return c;
  }
};

void print_step(const harness::StepRecord& r) {
  std::cout << "step " << r.step << " epoch " << r.epoch << " loss " << r.loss << " ce " << r.cross_entropy << " dice "
            << r.dice << " lr " << r.lr << '\n';
}

void print_report(const metrics::EvalReport& r) {
  std::cout << metrics::table1({r}).to_markdown();
  if (r.flagged_entries > 0) std::cout << r.flagged_entries << " organ entries flagged (empty prediction or truth)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FMD-TransUNet multi-organ segmentation"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one variant and evaluate it on the test split");
  DataArgs train_data;
  ConfigArgs train_config;
  std::string train_out = "runs/train", resume, weights;
  std::int64_t checkpoint_every = 0;
  bool quiet = false, deterministic = false;
  train_data.add(train_cmd);
  train_config.add(train_cmd);
  train_cmd->add_option("--out", train_out, "Output directory");
  train_cmd->add_option("--resume", resume, "Resume from a checkpoint");
  train_cmd->add_option("--weights", weights, "Initial weight archive");
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "Checkpoint interval in steps");
  train_cmd->add_flag("--deterministic", deterministic, "Single-threaded, deterministic kernels");
  train_cmd->add_flag("--quiet", quiet, "Do not print per-step loss");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  DataArgs eval_data;
  std::string eval_ckpt, eval_out = "runs/eval", eval_expect;
  eval_data.add(eval_cmd);
  eval_cmd->add_option("--ckpt,--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval_cmd->add_option("--out", eval_out, "Output directory");
  eval_cmd->add_option("--expect-config", eval_expect, "Reject the checkpoint unless its architecture matches");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the block and skip-layer ablations");
  DataArgs ablate_data;
  ConfigArgs ablate_config;
  std::string plan_path, ablate_out = "runs/ablate";
  ablate_data.add(ablate_cmd);
  ablate_config.add(ablate_cmd);
  ablate_cmd->add_option("--plan", plan_path, "Plan file; replaces --config");
  ablate_cmd->add_option("--out", ablate_out, "Output directory");

  // sweep-loss
  auto* sweep_cmd = app.add_subcommand("sweep-loss", "Sweep the cross-entropy/Dice weighting");
  DataArgs sweep_data;
  ConfigArgs sweep_config;
  std::string grid_text, sweep_out = "runs/sweep";
  sweep_data.add(sweep_cmd);
  sweep_config.add(sweep_cmd);
  sweep_cmd->add_option("--grid", grid_text, "Weight pairs w_c:w_d, comma separated");
  sweep_cmd->add_option("--out", sweep_out, "Output directory");

  // make-synthetic
  auto* synth_cmd = app.add_subcommand("make-synthetic", "Write a synthetic phantom dataset");
  int synth_cases = 6, synth_test = 2;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  synth_cmd->add_option("--cases", synth_cases, "Number of cases")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--test-cases", synth_test, "How many of them go to the test split");
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--out", synth_out, "Dataset root")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const auto data = train_data.load();
      harness::TrainOptions options;
      options.out_dir = train_out;
      options.checkpoint_every = checkpoint_every;
      options.deterministic = deterministic;
      if (!weights.empty()) options.weights = weights;
      if (!quiet) options.on_step = print_step;
      std::optional<harness::TrainState> state;
      ModelConfig config;
      if (!resume.empty()) {
        state = harness::load_checkpoint(resume);
        config = state->config;
        if (train_config.given()) {
          const auto requested = validate_config(train_config.load());
          if (!same_architecture(requested, config)) {
            throw ConfigMismatchError("resume: checkpoint architecture differs from --config");
          }
        }
      } else {
        config = train_config.load();
      }
      auto result = harness::train(config, data.train, options, state ? &*state : nullptr);
      const auto report = harness::evaluate_model(*result.model, data.test, std::string(to_string(config.variant)));
      harness::write_eval_outputs(report, train_out);
      print_report(report);
      std::cout << "wrote " << train_out << '\n';
    } else if (*eval_cmd) {
      const auto data = eval_data.load();
      std::optional<ModelConfig> expected;
      if (!eval_expect.empty()) expected = load_config_file(eval_expect);
      const auto report = harness::evaluate_checkpoint(eval_ckpt, data.test, expected);
      harness::write_eval_outputs(report, eval_out);
      print_report(report);
    } else if (*ablate_cmd) {
      harness::ExperimentPlan plan;
      if (!plan_path.empty()) {
        plan = harness::load_plan(plan_path);
      } else {
        plan.base = ablate_config.load();
        plan.base.skip_da_layers.reset();
        harness::expand_plan(plan);
      }
      const auto data = ablate_data.load(plan.split_dir.string());
      auto result = harness::ablate(plan, data, ablate_out, {}, [](const harness::RunOutcome& r) {
        std::cout << r.name << ": " << (r.ok ? "ok, mean DSC " + metrics::format_fixed(r.report.mean_dsc_pct) + "%"
                                             : "FAILED (" + r.error + ")")
                  << std::endl;
      });
      if (plan.table2) std::cout << result.table2.to_markdown() << '\n';
      if (plan.table3) std::cout << result.table3.to_markdown() << '\n';
      if (!result.batch_sequences_match) std::cout << "warning: runs saw different batch sequences\n";
      for (const auto& r : result.runs) {
        if (!r.ok) return r.exit_code;
      }
    } else if (*sweep_cmd) {
      const auto grid = grid_text.empty() ? harness::default_loss_grid() : harness::parse_loss_grid(grid_text);
      const auto config = sweep_config.load();
      const auto data = sweep_data.load();
      auto points = harness::sweep_loss(config, grid, data, sweep_out, {}, [](const harness::SweepPoint& p) {
        std::cout << harness::sweep_run_name(p.weights) << ": "
                  << (p.outcome.ok ? "DSC " + metrics::format_fixed(p.outcome.report.mean_dsc_pct) + "% HD " +
                                         metrics::format_fixed(p.outcome.report.mean_hd)
                                   : "FAILED (" + p.outcome.error + ")")
                  << std::endl;
      });
      std::cout << "wrote " << (fs::path(sweep_out) / "sweep.csv").string() << '\n';
      for (const auto& p : points) {
        if (!p.outcome.ok) return p.outcome.exit_code;
      }
    } else if (*synth_cmd) {
      if (synth_test < 0 || synth_test >= synth_cases) throw ConfigError("--test-cases must be in [0, --cases)");
      const auto cases = data::make_synthetic_phantom(synth_cases, synth_seed);
      data::DatasetSplit split;
      for (int i = 0; i < synth_cases; ++i) {
        data::save_case(cases[static_cast<std::size_t>(i)], synth_out);
        (i < synth_cases - synth_test ? split.train_cases : split.test_cases).push_back(cases[static_cast<std::size_t>(i)].id);
      }
      data::save_split(split, fs::path(synth_out) / "splits");
      std::cout << "wrote " << synth_cases << " cases to " << synth_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
