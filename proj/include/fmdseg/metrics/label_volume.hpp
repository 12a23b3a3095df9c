// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <torch/types.h>

namespace fmdseg {

/// Physical voxel size along (z, y, x).
struct Spacing {
  double z = 1.0;
  double y = 1.0;
  double x = 1.0;
  friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Dense (depth, height, width) integer label array, C order. A 2D mask is a
/// volume of depth 1.
class LabelVolume {
 public:
  LabelVolume() = default;
  LabelVolume(std::int64_t depth, std::int64_t height, std::int64_t width, std::uint8_t fill = 0);

  /// Rank-2 or rank-3 integer tensor. Throws ShapeError for other ranks and
  /// LabelRangeError (naming the slice) for values outside 0..255.
  static LabelVolume from_tensor(const torch::Tensor& labels);
  torch::Tensor to_tensor() const;

  std::int64_t depth() const noexcept { return depth_; }
  std::int64_t height() const noexcept { return height_; }
  std::int64_t width() const noexcept { return width_; }
  std::int64_t size() const noexcept { return depth_ * height_ * width_; }
  bool same_shape(const LabelVolume& other) const noexcept {
    return depth_ == other.depth_ && height_ == other.height_ && width_ == other.width_;
  }

  std::uint8_t& at(std::int64_t z, std::int64_t y, std::int64_t x) { return data_[index(z, y, x)]; }
  std::uint8_t at(std::int64_t z, std::int64_t y, std::int64_t x) const { return data_[index(z, y, x)]; }
  std::int64_t index(std::int64_t z, std::int64_t y, std::int64_t x) const noexcept {
    return (z * height_ + y) * width_ + x;
  }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  std::vector<std::uint8_t>& data() noexcept { return data_; }

  /// Number of voxels carrying `label`.
  std::int64_t count(int label) const noexcept;

  friend bool operator==(const LabelVolume&, const LabelVolume&) = default;

 private:
  std::int64_t depth_ = 0;
  std::int64_t height_ = 0;
  std::int64_t width_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace fmdseg
