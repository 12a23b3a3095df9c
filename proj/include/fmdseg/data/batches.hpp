// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"
#include "fmdseg/data/augment.hpp"
#include "fmdseg/data/preprocess.hpp"
#include "fmdseg/data/volume.hpp"

namespace fmdseg::data {

/// Preprocessed 224x224 slices of a set of cases, in case then slice order.
class SliceDataset {
 public:
  SliceDataset() = default;
  explicit SliceDataset(const std::vector<CaseVolume>& cases, const IntensityWindow& window = {});

  std::int64_t size() const noexcept { return images_.defined() ? images_.size(0) : 0; }
  /// (N, 224, 224) float32 and int64.
  const torch::Tensor& images() const noexcept { return images_; }
  const torch::Tensor& labels() const noexcept { return labels_; }
  const std::vector<std::string>& case_ids() const noexcept { return case_ids_; }
  /// Index into case_ids() of every slice.
  const std::vector<std::int32_t>& slice_case() const noexcept { return slice_case_; }

 private:
  torch::Tensor images_;
  torch::Tensor labels_;
  std::vector<std::string> case_ids_;
  std::vector<std::int32_t> slice_case_;
};

struct Batch {
  torch::Tensor images;  // (B, 1, 224, 224) float32
  torch::Tensor labels;  // (B, 224, 224) int64
  std::vector<std::int64_t> indices;
  std::int64_t epoch = 0;
};

/// Everything needed to continue a batch stream exactly where it stopped.
struct BatchIteratorState {
  std::int64_t epoch = 0;
  std::int64_t cursor = 0;
  std::vector<std::int64_t> permutation;
  std::string shuffle_rng;
  std::string augment_rng;
};

/// Endless stream of shuffled batches. Each epoch draws a fresh permutation
/// from the shuffle engine; the last batch of an epoch may be partial. The
/// sequence depends only on (dataset, batch size, augmentation config, seed).
class BatchIterator {
 public:
  /// Throws EmptyDatasetError when the dataset has no slices.
  BatchIterator(const SliceDataset& dataset, int batch_size, AugmentationConfig augment, std::uint64_t seed);

  Batch next();

  std::int64_t batches_per_epoch() const noexcept;
  std::int64_t epoch() const noexcept { return epoch_; }

  BatchIteratorState state() const;
  void restore(const BatchIteratorState& state);

 private:
  void reshuffle();

  const SliceDataset* dataset_;
  int batch_size_;
  AugmentationConfig augment_;
  Rng shuffle_rng_;
  Rng augment_rng_;
  std::int64_t epoch_ = 0;
  std::int64_t cursor_ = 0;
  std::vector<std::int64_t> permutation_;
};

/// ceil(slices / batch_size).
std::int64_t batches_per_epoch(std::int64_t slices, int batch_size);

}  // namespace fmdseg::data
