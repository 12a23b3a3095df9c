// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <torch/torch.h>

namespace fmdseg::data {

/// `.arr` files hold one dense array in NumPy `.npy` byte layout, so they can
/// be produced with `numpy.save` and renamed. Readable: format versions 1-3,
/// little-endian or single-byte dtypes f4 f8 i1 i2 i4 i8 u1 u2 b1, C or
/// Fortran order. Written: version 1, C order.
///
/// Throws FormatError for malformed or unsupported content, IOError when the
/// file cannot be opened.
torch::Tensor read_array(const std::filesystem::path& path);
torch::Tensor parse_array(const std::string& bytes, const std::string& where = "array");

void write_array(const torch::Tensor& array, const std::filesystem::path& path);
std::string serialize_array(const torch::Tensor& array);

}  // namespace fmdseg::data
