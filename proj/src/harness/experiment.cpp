// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/harness/experiment.hpp"

#include "fmdseg/core/errors.hpp"
#include "fmdseg/data/phantom.hpp"
#include "fmdseg/harness/evaluate.hpp"

namespace fmdseg::harness {

ExperimentData load_experiment_data(const std::filesystem::path& data_root, const std::filesystem::path& split_dir) {
  ExperimentData d;
  d.split = data::load_split(split_dir);
  d.train = data::SliceDataset(data::load_cases(data_root, d.split.train_cases));
  d.test = data::load_cases(data_root, d.split.test_cases);
  return d;
}

ExperimentData phantom_experiment_data(int train_cases, int test_cases, std::uint64_t seed) {
  auto cases = data::make_synthetic_phantom(train_cases + test_cases, seed);
  ExperimentData d;
  std::vector<data::CaseVolume> train(cases.begin(), cases.begin() + train_cases);
  for (const auto& c : train) d.split.train_cases.push_back(c.id);
  d.test.assign(cases.begin() + train_cases, cases.end());
  for (const auto& c : d.test) d.split.test_cases.push_back(c.id);
  data::validate_split(d.split);
  d.train = data::SliceDataset(train);
  return d;
}

RunOutcome run_experiment(const std::string& name, const ModelConfig& config, const ExperimentData& data,
                          const std::filesystem::path& out_dir, TrainOptions options) {
  RunOutcome r;
  r.name = name;
  r.config = config;
  try {
    const auto dir = out_dir / name;
    options.out_dir = dir;
    auto result = train(config, data.train, options);
    r.batch_digest = result.state.batch_digest;
    r.history = result.state.history;
    r.report = evaluate_model(*result.model, data.test, name, config.optimizer.batch_size);
    write_eval_outputs(r.report, dir);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
    r.exit_code = exit_code_for(e);
    r.report.name = name;
  }
  return r;
}

}  // namespace fmdseg::harness
