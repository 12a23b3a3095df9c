// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "fmdseg/data/volume.hpp"

namespace fmdseg::data {

struct PhantomOptions {
  std::int64_t slices = 8;
  std::int64_t size = 224;
};

/// Synthetic abdomen-like volumes. Each slice holds a body ellipse with the
/// eight organ regions laid out without overlap: a large liver, mid-size
/// stomach and spleen, paired kidneys, and small aorta, gallbladder and a
/// thin curved pancreas. Shapes, positions and sizes jitter per case and
/// vary smoothly along z. Organ intensity distributions overlap (liver,
/// spleen and pancreas; stomach, gallbladder and soft tissue), so labels are
/// only separable with spatial context. Every volume uses all nine labels.
std::vector<CaseVolume> make_synthetic_phantom(int n_cases, std::uint64_t seed, const PhantomOptions& options = {});

/// Case ids are "phantom000", "phantom001", ...
std::string phantom_case_id(int index);

}  // namespace fmdseg::data
