// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/metrics/label_volume.hpp"

#include <algorithm>
#include <cstring>

#include "fmdseg/core/errors.hpp"

namespace fmdseg {

LabelVolume::LabelVolume(std::int64_t depth, std::int64_t height, std::int64_t width, std::uint8_t fill)
    : depth_(depth), height_(height), width_(width) {
  if (depth < 0 || height < 0 || width < 0) throw ShapeError("LabelVolume: negative extent");
  data_.assign(static_cast<std::size_t>(depth * height * width), fill);
}

LabelVolume LabelVolume::from_tensor(const torch::Tensor& labels) {
  if (labels.dim() != 2 && labels.dim() != 3) {
    throw ShapeError("LabelVolume: expected a rank-2 or rank-3 label tensor, got rank " +
                     std::to_string(labels.dim()));
  }
  if (labels.is_floating_point()) throw ShapeError("LabelVolume: labels must be integers");
  auto t = labels.dim() == 2 ? labels.unsqueeze(0) : labels;
  t = t.to(torch::kCPU, torch::kLong).contiguous();
  LabelVolume v(t.size(0), t.size(1), t.size(2));
  const auto* src = t.data_ptr<std::int64_t>();
  const auto plane = v.height_ * v.width_;
  for (std::int64_t i = 0; i < v.size(); ++i) {
    if (src[i] < 0 || src[i] > 255) {
      throw LabelRangeError("LabelVolume: label " + std::to_string(src[i]) + " in slice " +
                                std::to_string(plane == 0 ? 0 : i / plane) + " is not a class id",
                            plane == 0 ? 0 : i / plane);
    }
    v.data_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(src[i]);
  }
  return v;
}

torch::Tensor LabelVolume::to_tensor() const {
  auto t = torch::empty({depth_, height_, width_}, torch::kUInt8);
  if (!data_.empty()) std::memcpy(t.data_ptr<std::uint8_t>(), data_.data(), data_.size());
  return t.to(torch::kLong);
}

std::int64_t LabelVolume::count(int label) const noexcept {
  return std::count(data_.begin(), data_.end(), static_cast<std::uint8_t>(label));
}

}  // namespace fmdseg
