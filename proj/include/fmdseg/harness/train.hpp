// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>

#include "fmdseg/core/config.hpp"
#include "fmdseg/data/batches.hpp"
#include "fmdseg/harness/checkpoint.hpp"
#include "fmdseg/network/model.hpp"

namespace fmdseg::harness {

struct StepRecord {
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  double loss = 0.0;
  double cross_entropy = 0.0;
  double dice = 0.0;
  double lr = 0.0;
};

struct TrainOptions {
  // Checkpoints, history.csv and config.cfg go here when set.
  std::optional<std::filesystem::path> out_dir;
  // Save step_<k>.ckpt every this many steps (0: final checkpoint only).
  std::int64_t checkpoint_every = 0;
  // Single-threaded, deterministic kernels.
  bool deterministic = true;
  // Stop once this many total steps are done without changing the schedule
  // horizon (used to split a run into resumable pieces). Negative: run to the end.
  std::int64_t stop_at_step = -1;
  // Optional pretrained weights applied after seeding.
  std::optional<std::filesystem::path> weights;
  std::function<void(const StepRecord&)> on_step;
};

struct TrainResult {
  TrainState state;
  network::FmdTransUNet model{nullptr};
};

/// Total optimization steps: optimizer.max_steps, or max_epochs full passes.
std::int64_t planned_steps(const ModelConfig& config, std::int64_t train_slices);

/// Trains on `train_set` with the composite loss and SGD. With `resume`, the
/// model, optimizer and batch stream continue from that state (its config must
/// share the architecture, else ConfigMismatchError).
/// A non-finite loss writes <out_dir>/last_good.ckpt (the state before the
/// failing step) and throws DivergenceError.
TrainResult train(const ModelConfig& config, const data::SliceDataset& train_set, const TrainOptions& options = {},
                  const TrainState* resume = nullptr);

/// Applies the deterministic-mode switches (single thread, deterministic algorithms).
void set_deterministic(bool on);

/// Folds a batch's slice indices into a running digest.
std::uint64_t fold_batch_digest(std::uint64_t digest, const std::vector<std::int64_t>& indices);

void write_history_csv(const std::vector<HistoryEntry>& history, const std::filesystem::path& path);

}  // namespace fmdseg::harness
