// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fmdseg/core/config.hpp"
#include "fmdseg/harness/experiment.hpp"
#include "fmdseg/metrics/report.hpp"

namespace fmdseg::harness {

struct PlanRun {
  std::string name;
  ModelConfig config;
};

/// Named set of runs sharing one base config (seed, optimizer, split).
struct ExperimentPlan {
  std::string name = "ablation";
  ModelConfig base;
  std::filesystem::path split_dir;  // empty: <data>/splits
  bool table2 = true;
  bool table3 = true;
  std::vector<PlanRun> runs;
};

/// Run names of the two ablation tables, in row order.
std::vector<std::string> table2_run_names();
std::vector<std::string> table3_run_names();
/// Skip subset of each Table-3 row: none, {1}, {1,2}, {1,2,3}.
std::vector<SkipLayerSet> table3_skip_sets();

/// Fills `plan.runs` from the table flags: baseline, only_mewb, only_da_plus
/// and full (skips {1,2,3}) for Table 2; full with none, {1}, {1,2}, {1,2,3}
/// for Table 3. The full/{1,2,3} run is shared by both tables.
void expand_plan(ExperimentPlan& plan);

/// Throws ConfigError on duplicate run names or invalid run configs.
void validate_plan(const ExperimentPlan& plan);

/// Plan file: flat `key = value` lines.
///   name   = <plan name>
///   config = <config file, relative to the plan file>
///   split  = <split directory, relative to the plan file>   (optional)
///   tables = 2,3                                            (optional)
/// Any other key is applied on top of the base config (e.g.
/// `optimizer.max_steps = 100`).
ExperimentPlan load_plan(const std::filesystem::path& path);

struct AblationResult {
  std::vector<RunOutcome> runs;
  metrics::Table table2;
  metrics::Table table3;
  // Every successful run consumed the identical batch sequence.
  bool batch_sequences_match = true;
};

/// Runs every plan entry in order; a failing run is recorded and its
/// siblings still run. Writes table2.{csv,md}, table3.{csv,md},
/// runs.csv (status per run) and seed_audit.txt under `out_dir`.
AblationResult ablate(const ExperimentPlan& plan, const ExperimentData& data, const std::filesystem::path& out_dir,
                      TrainOptions options = {},
                      const std::function<void(const RunOutcome&)>& on_run = {});

}  // namespace fmdseg::harness
