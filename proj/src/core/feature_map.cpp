// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/core/feature_map.hpp"

#include <sstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg {

void require_feature_map(const torch::Tensor& x, std::string_view where) {
  if (!x.defined() || x.dim() != 4) {
    std::ostringstream msg;
    msg << where << ": expected a (B,C,H,W) feature map, got ";
    if (x.defined()) msg << x.sizes(); else msg << "undefined tensor";
    throw ShapeError(msg.str());
  }
  for (auto s : x.sizes()) {
    if (s < 1) {
      std::ostringstream msg;
      msg << where << ": feature map has an empty dimension " << x.sizes();
      throw ShapeError(msg.str());
    }
  }
}

void require_channels(const torch::Tensor& x, std::int64_t channels, std::string_view where) {
  require_feature_map(x, where);
  if (x.size(1) != channels) {
    std::ostringstream msg;
    msg << where << ": expected " << channels << " channels, got " << x.size(1);
    throw ShapeError(msg.str());
  }
}

bool all_finite(const torch::Tensor& x) { return torch::isfinite(x).all().item<bool>(); }

std::string probe_name(std::string_view prefix, std::string_view name) {
  if (prefix.empty()) return std::string(name);
  std::string out(prefix);
  out += '.';
  out += name;
  return out;
}

}  // namespace fmdseg
