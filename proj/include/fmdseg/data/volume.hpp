// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/metrics/label_volume.hpp"

namespace fmdseg::data {

/// One CT case: image (slices, H, W) float32 in Hounsfield-like units,
/// labels (slices, H, W) int64 in 0..8, spacing (z, y, x).
struct CaseVolume {
  std::string id;
  torch::Tensor image;
  torch::Tensor labels;
  Spacing spacing;

  std::int64_t slices() const { return image.size(0); }
};

/// Throws FormatError (shapes, spacing) or LabelRangeError naming the first
/// offending slice.
void validate_case(const CaseVolume& c);

/// Reads `<dir>/image.arr`, `<dir>/label.arr` and `<dir>/spacing.txt`
/// ("z y x", whitespace separated). The case id is the directory name.
CaseVolume load_case(const std::filesystem::path& dir);

/// Writes the case under `<root>/cases/<id>/`.
void save_case(const CaseVolume& c, const std::filesystem::path& root);

std::filesystem::path case_dir(const std::filesystem::path& root, const std::string& id);

/// Case-level train/test assignment read from `<dir>/train.txt` and
/// `<dir>/test.txt` (one id per line, blank lines and '#' comments ignored).
struct DatasetSplit {
  std::vector<std::string> train_cases;
  std::vector<std::string> test_cases;
};

/// Throws DataError when a case id is listed twice or in both lists.
void validate_split(const DatasetSplit& split);
DatasetSplit load_split(const std::filesystem::path& dir);
void save_split(const DatasetSplit& split, const std::filesystem::path& dir);

std::vector<CaseVolume> load_cases(const std::filesystem::path& root, const std::vector<std::string>& ids);

std::int64_t total_slices(const std::vector<CaseVolume>& cases);

}  // namespace fmdseg::data
