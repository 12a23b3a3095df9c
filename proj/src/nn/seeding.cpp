// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/nn/seeding.hpp"

#include <stdexcept>

#include <ATen/CPUGeneratorImpl.h>

#include "fmdseg/nn/layers.hpp"

namespace fmdseg::nn {

std::uint64_t path_seed(std::uint64_t seed, std::string_view path) noexcept {
  // FNV-1a over the path, then a splitmix64 finalizer with the run seed.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : path) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void seed_parameters(torch::nn::Module& root, std::uint64_t seed) {
  torch::NoGradGuard no_grad;
  for (const auto& item : root.named_modules(/*name_prefix=*/"", /*include_self=*/true)) {
    auto& module = *item.value();
    if (auto* seedable = dynamic_cast<Seedable*>(&module)) {
      auto gen = at::make_generator<at::CPUGeneratorImpl>(path_seed(seed, item.key()));
      seedable->reset_parameters(gen);
    } else if (!module.named_parameters(/*recurse=*/false).is_empty()) {
      throw std::logic_error("module '" + item.key() + "' owns parameters but cannot seed them");
    }
  }
}

std::int64_t parameter_count(const torch::nn::Module& module) {
  std::int64_t total = 0;
  for (const auto& p : module.parameters()) total += p.numel();
  return total;
}

}  // namespace fmdseg::nn
