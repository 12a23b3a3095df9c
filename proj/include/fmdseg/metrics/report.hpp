// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "fmdseg/core/config.hpp"
#include "fmdseg/core/organ.hpp"
#include "fmdseg/metrics/label_volume.hpp"

namespace fmdseg::metrics {

/// One organ of one case under the empty-mask policy:
///   both masks empty   -> dsc 1, hd 0, undefined (left out of averages)
///   exactly one empty  -> dsc 0, hd = volume diagonal, flagged
struct OrganScore {
  double dsc = 1.0;
  double hd = 0.0;    // spacing units (mm)
  double hd95 = 0.0;
  double hd_voxel = 0.0;
  double hd95_voxel = 0.0;
  bool prediction_empty = true;
  bool truth_empty = true;

  bool defined() const noexcept { return !(prediction_empty && truth_empty); }
  bool flagged() const noexcept { return prediction_empty != truth_empty; }
};

struct CaseReport {
  std::string case_id;
  std::array<OrganScore, kNumOrgans> organs;  // indexed by organ id - 1
  double mean_dsc = 1.0;                      // over defined organs
  double mean_hd = 0.0;
  bool flagged() const noexcept;
};

CaseReport score_case(const LabelVolume& prediction, const LabelVolume& truth, const Spacing& spacing,
                      std::string case_id = {});

/// Argmax over the class axis of each (9, h, w) or (1, 9, h, w) slice, nearest
/// resize to the label grid when sizes differ, stack along z, then 3D scoring.
/// Throws MissingSliceError when the slice count differs from truth.depth().
CaseReport evaluate_case(const std::vector<torch::Tensor>& slice_logits, const LabelVolume& truth,
                         const Spacing& spacing, std::string case_id = {});

/// Argmax labels of one slice's logits, resized (nearest) to height x width.
torch::Tensor predict_labels(const torch::Tensor& logits, std::int64_t height, std::int64_t width);

struct OrganSummary {
  double dsc_pct = 100.0;
  double hd = 0.0;
  double hd95 = 0.0;
  double hd_voxel = 0.0;
  double hd95_voxel = 0.0;
  int defined_cases = 0;
  int flagged_cases = 0;
};

/// Table-1-shaped aggregate: per-organ means over cases (undefined entries
/// excluded), headline means over the 8 organs.
struct EvalReport {
  std::string name;
  std::array<OrganSummary, kNumOrgans> per_organ;
  double mean_dsc_pct = 100.0;
  double mean_hd = 0.0;
  double mean_hd95 = 0.0;
  int case_count = 0;
  int flagged_entries = 0;
  std::vector<CaseReport> cases;
};

/// Reduces in case order, independent of how the case scores were produced.
EvalReport aggregate(std::string name, std::vector<CaseReport> cases);

/// Plain rectangular table with CSV and Markdown renderings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  std::string to_markdown() const;
  /// Writes <stem>.csv and <stem>.md.
  void write(const std::filesystem::path& stem) const;
};

/// Model, DSC(%), HD(mm), then per-organ DSC(%) in the order
/// Aorta, Gallbladder, Kidney (L), Kidney (R), Liver, Pancreas, Spleen, Stomach.
Table table1(const std::vector<EvalReport>& reports);

/// Model, Average DSC, Average HD, then DSC and HD per organ (2 + 8x2 values).
Table table2(const std::vector<EvalReport>& reports);

struct SkipAblationRow {
  SkipLayerSet layers;
  EvalReport report;
};
/// Label, 1st/2nd/3rd layer check marks, DSC(%), HD(mm).
Table table3(const std::vector<SkipAblationRow>& rows);

/// One row per (case, organ) with every exported value and the flag.
Table case_detail(const EvalReport& report);

/// Fixed-point formatting used by every table.
std::string format_fixed(double value, int decimals = 2);

}  // namespace fmdseg::metrics
