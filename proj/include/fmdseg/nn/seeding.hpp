// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

#include <torch/torch.h>

namespace fmdseg::nn {

/// Mixes a run seed with a parameter path into an independent stream seed.
std::uint64_t path_seed(std::uint64_t seed, std::string_view path) noexcept;

/// Initializes every parameter of `root` from a generator keyed on the owning
/// module's path. Two models that share a sub-tree path receive identical
/// weights there regardless of which other blocks they contain.
/// Throws std::logic_error if some module owns parameters but is not Seedable.
void seed_parameters(torch::nn::Module& root, std::uint64_t seed);

std::int64_t parameter_count(const torch::nn::Module& module);

}  // namespace fmdseg::nn
