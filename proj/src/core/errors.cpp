// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/core/errors.hpp"

namespace fmdseg {

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const DivergenceError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const DataError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 1;
  // Shape problems in a validated run stem from the configuration.
  if (dynamic_cast<const ShapeError*>(&e) != nullptr) return 1;
  return 1;
}

}  // namespace fmdseg
