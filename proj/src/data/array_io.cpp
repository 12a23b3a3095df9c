// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/data/array_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::data {

static_assert(std::endian::native == std::endian::little, "array payloads are read in host byte order");

namespace {

constexpr char kMagic[] = "\x93NUMPY";

torch::ScalarType dtype_from_descr(const std::string& descr, const std::string& where) {
  if (descr.size() < 2) throw FormatError(where + ": bad dtype '" + descr + "'");
  const char order = descr[0];
  const auto code = descr.substr(1);
  const bool single_byte = code == "i1" || code == "u1" || code == "b1";
  if (order == '>' && !single_byte) throw FormatError(where + ": big-endian arrays are not supported");
  if (order != '<' && order != '|' && order != '=' && order != '>') {
    throw FormatError(where + ": bad dtype '" + descr + "'");
  }
  if (code == "f4") return torch::kFloat32;
  if (code == "f8") return torch::kFloat64;
  if (code == "i1") return torch::kInt8;
  if (code == "i2") return torch::kInt16;
  if (code == "i4") return torch::kInt32;
  if (code == "i8") return torch::kInt64;
  if (code == "u1") return torch::kUInt8;
  if (code == "b1") return torch::kBool;
  if (code == "u2") return torch::kInt32;  // widened on read
  throw FormatError(where + ": unsupported dtype '" + descr + "'");
}

std::string descr_for(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "<f4";
    case torch::kFloat64: return "<f8";
    case torch::kInt8: return "|i1";
    case torch::kInt16: return "<i2";
    case torch::kInt32: return "<i4";
    case torch::kInt64: return "<i8";
    case torch::kUInt8: return "|u1";
    case torch::kBool: return "|b1";
    default: throw FormatError(std::string("array: cannot store dtype ") + c10::toString(t));
  }
}

std::string dict_value(const std::string& header, const std::string& key, const std::string& where) {
  const std::regex re("['\"]" + key + "['\"]\\s*:\\s*('[^']*'|\"[^\"]*\"|True|False|\\([^)]*\\))");
  std::smatch m;
  if (!std::regex_search(header, m, re)) throw FormatError(where + ": header lacks '" + key + "'");
  auto v = m[1].str();
  if (v.front() == '\'' || v.front() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

std::vector<std::int64_t> parse_shape(const std::string& tuple, const std::string& where) {
  std::vector<std::int64_t> shape;
  std::string inner = tuple.substr(1, tuple.size() - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \tL");
    try {
      std::size_t used = 0;
      const auto value = std::stoll(item.substr(b, e - b + 1), &used);
      if (used != e - b + 1 || value < 0) throw std::invalid_argument("shape");
      shape.push_back(value);
    } catch (const std::exception&) {
      throw FormatError(where + ": bad shape " + tuple);
    }
  }
  return shape;
}

}  // namespace

torch::Tensor parse_array(const std::string& bytes, const std::string& where) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) {
    throw FormatError(where + ": missing array magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw FormatError(where + ": truncated header");
    for (int i = 0; i < 4; ++i) header_len |= static_cast<std::size_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
    offset = 12;
  } else {
    throw FormatError(where + ": unsupported format version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) throw FormatError(where + ": truncated header");
  const std::string header = bytes.substr(offset, header_len);
  const auto descr = dict_value(header, "descr", where);
  const bool fortran = dict_value(header, "fortran_order", where) == "True";
  const auto shape = parse_shape(dict_value(header, "shape", where), where);
  const bool widen_u16 = descr.size() == 3 && descr.substr(1) == "u2";
  const auto dtype = dtype_from_descr(descr, where);

  std::int64_t count = 1;
  for (auto s : shape) count *= s;
  const std::size_t item = widen_u16 ? 2 : static_cast<std::size_t>(c10::elementSize(dtype));
  const std::size_t payload = offset + header_len;
  const auto need = static_cast<std::size_t>(count) * item;
  if (bytes.size() - payload < need) throw FormatError(where + ": payload shorter than shape requires");

  const std::vector<std::int64_t> storage_shape = fortran ? std::vector<std::int64_t>(shape.rbegin(), shape.rend()) : shape;
  torch::Tensor t;
  if (widen_u16) {
    auto raw = torch::empty(storage_shape, torch::kInt16);
    std::memcpy(raw.data_ptr(), bytes.data() + payload, need);
    t = raw.to(torch::kInt32).bitwise_and(0xffff);
  } else {
    t = torch::empty(storage_shape, torch::TensorOptions().dtype(dtype));
    if (need > 0) std::memcpy(t.data_ptr(), bytes.data() + payload, need);
  }
  if (fortran && t.dim() > 1) {
    std::vector<std::int64_t> perm(static_cast<std::size_t>(t.dim()));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<std::int64_t>(perm.size() - 1 - i);
    t = t.permute(perm).contiguous();
  }
  return t;
}

torch::Tensor read_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_array(bytes, path.string());
}

std::string serialize_array(const torch::Tensor& array) {
  const auto t = array.detach().to(torch::kCPU).contiguous();
  std::string shape = "(";
  for (std::int64_t i = 0; i < t.dim(); ++i) shape += std::to_string(t.size(i)) + (t.dim() == 1 || i + 1 < t.dim() ? "," : "");
  // Join with ", " like numpy; a 1-tuple keeps its trailing comma.
  std::string pretty;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    pretty += shape[i];
    if (shape[i] == ',' && i + 1 < shape.size()) pretty += ' ';
  }
  pretty += ")";
  std::string header = "{'descr': '" + descr_for(t.scalar_type()) + "', 'fortran_order': False, 'shape': " + pretty + ", }";
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';
  std::string out(kMagic, 6);
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(header.size() & 0xff);
  out += static_cast<char>((header.size() >> 8) & 0xff);
  out += header;
  out.append(static_cast<const char*>(t.data_ptr()), static_cast<std::size_t>(t.numel() * t.element_size()));
  return out;
}

void write_array(const torch::Tensor& array, const std::filesystem::path& path) {
  const auto bytes = serialize_array(array);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IOError("write failed for " + path.string());
}

}  // namespace fmdseg::data
