// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fmdseg/core/config.hpp"
#include "fmdseg/data/batches.hpp"
#include "fmdseg/data/volume.hpp"
#include "fmdseg/harness/train.hpp"
#include "fmdseg/metrics/report.hpp"

namespace fmdseg::harness {

/// Training slices plus held-out test cases for one controlled comparison.
struct ExperimentData {
  data::DatasetSplit split;
  data::SliceDataset train;
  std::vector<data::CaseVolume> test;
};

/// Loads `<data_root>/cases/<id>` for every id of the split (hygiene checked).
ExperimentData load_experiment_data(const std::filesystem::path& data_root, const std::filesystem::path& split_dir);

/// In-process phantom cases, the first `train_cases` for training.
ExperimentData phantom_experiment_data(int train_cases, int test_cases, std::uint64_t seed);

struct RunOutcome {
  std::string name;
  ModelConfig config;
  bool ok = false;
  std::string error;
  int exit_code = 0;
  metrics::EvalReport report;
  std::uint64_t batch_digest = 0;
  std::vector<HistoryEntry> history;
};

/// Train then evaluate on the test cases, writing into `<out_dir>/<name>/`.
/// Failures are captured in the outcome rather than thrown.
RunOutcome run_experiment(const std::string& name, const ModelConfig& config, const ExperimentData& data,
                          const std::filesystem::path& out_dir, TrainOptions options = {});

}  // namespace fmdseg::harness
