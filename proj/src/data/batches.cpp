// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/data/batches.hpp"

#include <numeric>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::data {

SliceDataset::SliceDataset(const std::vector<CaseVolume>& cases, const IntensityWindow& window) {
  std::vector<torch::Tensor> images, labels;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& c = cases[k];
    validate_case(c);
    case_ids_.push_back(c.id);
    for (std::int64_t z = 0; z < c.slices(); ++z) {
      images.push_back(preprocess_slice(c.image[z], window));
      labels.push_back(preprocess_labels(c.labels[z]));
      slice_case_.push_back(static_cast<std::int32_t>(k));
    }
  }
  if (!images.empty()) {
    images_ = torch::stack(images);
    labels_ = torch::stack(labels);
  }
}

std::int64_t batches_per_epoch(std::int64_t slices, int batch_size) {
  return (slices + batch_size - 1) / batch_size;
}

BatchIterator::BatchIterator(const SliceDataset& dataset, int batch_size, AugmentationConfig augment,
                             std::uint64_t seed)
    : dataset_(&dataset),
      batch_size_(batch_size),
      augment_(augment),
      shuffle_rng_(seed),
      augment_rng_(seed ^ 0xa5a5a5a55a5a5a5aull) {
  if (dataset.size() == 0) throw EmptyDatasetError("batch iterator: the dataset has no slices");
  if (batch_size < 1) throw ConfigError("batch iterator: batch_size must be >= 1");
  reshuffle();
}

void BatchIterator::reshuffle() {
  permutation_.resize(static_cast<std::size_t>(dataset_->size()));
  std::iota(permutation_.begin(), permutation_.end(), 0);
  // Fisher-Yates with an explicit bounded draw, identical on every platform.
  for (std::size_t i = permutation_.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(shuffle_rng_) * static_cast<double>(i));
    std::swap(permutation_[i - 1], permutation_[std::min(j, i - 1)]);
  }
  cursor_ = 0;
}

std::int64_t BatchIterator::batches_per_epoch() const noexcept {
  return data::batches_per_epoch(dataset_->size(), batch_size_);
}

Batch BatchIterator::next() {
  if (cursor_ >= static_cast<std::int64_t>(permutation_.size())) {
    ++epoch_;
    reshuffle();
  }
  Batch b;
  b.epoch = epoch_;
  const auto end = std::min<std::int64_t>(cursor_ + batch_size_, static_cast<std::int64_t>(permutation_.size()));
  std::vector<torch::Tensor> images, labels;
  for (auto i = cursor_; i < end; ++i) {
    const auto index = permutation_[static_cast<std::size_t>(i)];
    b.indices.push_back(index);
    auto image = dataset_->images()[index];
    auto label = dataset_->labels()[index];
    if (augment_.enabled) {
      auto pair = augment(image, label, augment_, augment_rng_);
      image = pair.image;
      label = pair.labels;
    }
    images.push_back(image);
    labels.push_back(label);
  }
  cursor_ = end;
  b.images = torch::stack(images).unsqueeze(1).contiguous();
  b.labels = torch::stack(labels).contiguous();
  return b;
}

BatchIteratorState BatchIterator::state() const {
  return {epoch_, cursor_, permutation_, save_rng(shuffle_rng_), save_rng(augment_rng_)};
}

void BatchIterator::restore(const BatchIteratorState& state) {
  if (state.permutation.size() != static_cast<std::size_t>(dataset_->size()) || state.cursor < 0 ||
      state.cursor > static_cast<std::int64_t>(state.permutation.size())) {
    throw FormatError("batch iterator: saved state does not fit this dataset");
  }
  epoch_ = state.epoch;
  cursor_ = state.cursor;
  permutation_ = state.permutation;
  shuffle_rng_ = load_rng(state.shuffle_rng);
  augment_rng_ = load_rng(state.augment_rng);
}

}  // namespace fmdseg::data
