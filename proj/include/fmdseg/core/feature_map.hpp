// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <string_view>

#include <torch/types.h>

namespace fmdseg {

/// Rank-4 (batch, channel, height, width) activations flow between blocks as
/// plain tensors; these helpers assert the FeatureMap contract at block edges.
void require_feature_map(const torch::Tensor& x, std::string_view where);

/// Throws ShapeError unless x has exactly `channels` channels.
void require_channels(const torch::Tensor& x, std::int64_t channels, std::string_view where);

bool all_finite(const torch::Tensor& x);

/// Observer for named intermediate activations. Blocks call it at their
/// boundaries when one is installed; the tensor is the live activation.
using ActivationProbe = std::function<void(std::string_view name, const torch::Tensor& value)>;

inline void emit(const ActivationProbe* probe, std::string_view name, const torch::Tensor& value) {
  if (probe != nullptr && *probe) (*probe)(name, value);
}

/// Joins a probe prefix and a local name with '.', skipping empty prefixes.
std::string probe_name(std::string_view prefix, std::string_view name);

}  // namespace fmdseg
