// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fmdseg {

/// Synapse label vocabulary. Id 0 is background, 1..8 are the evaluated organs.
enum class Organ : std::uint8_t {
  background = 0,
  aorta = 1,
  gallbladder = 2,
  kidney_left = 3,
  kidney_right = 4,
  liver = 5,
  pancreas = 6,
  spleen = 7,
  stomach = 8,
};

inline constexpr int kNumClasses = 9;
inline constexpr int kNumOrgans = 8;

/// Foreground organs in report column order.
inline constexpr std::array<Organ, kNumOrgans> kOrgans = {
    Organ::aorta, Organ::gallbladder, Organ::kidney_left, Organ::kidney_right,
    Organ::liver, Organ::pancreas,    Organ::spleen,      Organ::stomach,
};

constexpr int organ_id(Organ o) noexcept { return static_cast<int>(o); }
constexpr bool is_valid_label(int v) noexcept { return v >= 0 && v < kNumClasses; }

std::string_view organ_name(Organ o) noexcept;
/// Column title used in report tables, e.g. "Kidney (L)".
std::string_view organ_title(Organ o) noexcept;
std::optional<Organ> organ_from_name(std::string_view name) noexcept;
std::optional<Organ> organ_from_id(int id) noexcept;

}  // namespace fmdseg
