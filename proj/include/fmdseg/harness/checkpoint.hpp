// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"
#include "fmdseg/data/batches.hpp"

namespace fmdseg::harness {

struct HistoryEntry {
  std::int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

/// Everything a run needs to continue bit-for-bit: parameters, momentum
/// buffers, the batch stream position and the loss history.
struct TrainState {
  ModelConfig config;
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  // Lowest training loss seen so far; +inf before the first step.
  double best_metric = std::numeric_limits<double>::infinity();
  std::map<std::string, torch::Tensor> params;
  std::map<std::string, torch::Tensor> momentum;
  data::BatchIteratorState iterator;
  std::vector<HistoryEntry> history;
  // Running hash of every consumed batch's slice indices.
  std::uint64_t batch_digest = 0;
};

/// Checkpoint layout inside the named-tensor archive:
///   meta.kind = "train_state", meta.config = flat config text, meta.step,
///   meta.epoch, meta.best_metric (null when infinite), meta.batch_digest,
///   meta.iterator = {epoch, cursor, shuffle_rng, augment_rng}
///   <parameter path>                  model parameters
///   state.optim.momentum.<path>       momentum buffers
///   state.history.{step,loss,lr}      loss history columns
///   state.iterator.permutation        current epoch order
/// A checkpoint is also a valid weight file for build_variant.
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);

/// Throws IOError, FormatError or VersionError.
TrainState load_checkpoint(const std::filesystem::path& path);

/// As above, and throws ConfigMismatchError unless the checkpoint's
/// architecture matches `expected`.
TrainState load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

/// Copies a module's parameters (detached clones) keyed by path.
std::map<std::string, torch::Tensor> snapshot_parameters(const torch::nn::Module& module);

}  // namespace fmdseg::harness
