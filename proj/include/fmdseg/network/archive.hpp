// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <torch/torch.h>

#include "json.hpp"

namespace fmdseg::network {

/// Named-tensor container used for weight files and training checkpoints.
///
/// Layout (all integers little-endian):
///   8 bytes   magic "FMDCKPT1"
///   u64       header length L
///   L bytes   UTF-8 JSON header:
///               {"format_version": 1,
///                "meta": {...},
///                "tensors": [{"name", "dtype", "shape", "offset", "nbytes"}, ...]}
///   payload   raw C-order tensor bytes; offsets are relative to the payload start
///
/// Tensors are written in name order so identical contents give identical files.
/// Supported dtypes: float32, float64, int64, int32, uint8.
struct TensorArchive {
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, torch::Tensor> tensors;
};

inline constexpr int kArchiveFormatVersion = 1;

/// Throws IOError when the file cannot be written.
void write_archive(const TensorArchive& archive, const std::filesystem::path& path);

/// Throws IOError (unreadable), FormatError (bad magic, truncated or malformed
/// header) or VersionError (newer format_version).
TensorArchive read_archive(const std::filesystem::path& path);

}  // namespace fmdseg::network
