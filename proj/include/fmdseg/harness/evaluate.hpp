// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fmdseg/core/config.hpp"
#include "fmdseg/data/preprocess.hpp"
#include "fmdseg/data/volume.hpp"
#include "fmdseg/metrics/report.hpp"
#include "fmdseg/network/model.hpp"

namespace fmdseg::harness {

/// Slice-wise inference (no augmentation, eval mode, no grad) followed by 3D
/// per-case scoring against each case's original-resolution labels.
metrics::EvalReport evaluate_model(network::FmdTransUNetImpl& model, const std::vector<data::CaseVolume>& cases,
                                   std::string name, int batch_size = 8, const data::IntensityWindow& window = {});

/// Rebuilds the model from the checkpoint's embedded config. With `expected`,
/// throws ConfigMismatchError when the architectures differ.
metrics::EvalReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                        const std::vector<data::CaseVolume>& cases,
                                        const std::optional<ModelConfig>& expected = std::nullopt,
                                        std::string name = {});

/// table1.{csv,md} and cases.{csv,md} under `dir`.
void write_eval_outputs(const metrics::EvalReport& report, const std::filesystem::path& dir);

/// Mean foreground DSC (fraction) of a report.
inline double mean_dsc_fraction(const metrics::EvalReport& r) { return r.mean_dsc_pct / 100.0; }

}  // namespace fmdseg::harness
