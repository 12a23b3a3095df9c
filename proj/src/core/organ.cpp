// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/core/organ.hpp"

namespace fmdseg {
namespace {

struct OrganInfo {
  std::string_view name;
  std::string_view title;
};

constexpr std::array<OrganInfo, kNumClasses> kInfo = {{
    {"background", "Background"},
    {"aorta", "Aorta"},
    {"gallbladder", "Gallbladder"},
    {"kidney_left", "Kidney (L)"},
    {"kidney_right", "Kidney (R)"},
    {"liver", "Liver"},
    {"pancreas", "Pancreas"},
    {"spleen", "Spleen"},
    {"stomach", "Stomach"},
}};

}  // namespace

std::string_view organ_name(Organ o) noexcept { return kInfo[static_cast<std::size_t>(o)].name; }

std::string_view organ_title(Organ o) noexcept { return kInfo[static_cast<std::size_t>(o)].title; }

std::optional<Organ> organ_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kInfo.size(); ++i) {
    if (kInfo[i].name == name) return static_cast<Organ>(i);
  }
  return std::nullopt;
}

std::optional<Organ> organ_from_id(int id) noexcept {
  if (!is_valid_label(id)) return std::nullopt;
  return static_cast<Organ>(id);
}

}  // namespace fmdseg
