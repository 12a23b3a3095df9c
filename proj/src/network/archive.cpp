// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/network/archive.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <bit>
#include <fstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::network {

namespace {

static_assert(std::endian::native == std::endian::little, "payloads are stored in host byte order");

constexpr std::array<char, 8> kMagic = {'F', 'M', 'D', 'C', 'K', 'P', 'T', '1'};

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    case torch::kInt32: return "int32";
    case torch::kUInt8: return "uint8";
    default: throw FormatError(std::string("archive: unsupported dtype ") + c10::toString(t));
  }
}

torch::ScalarType dtype_from_name(const std::string& name) {
  if (name == "float32") return torch::kFloat32;
  if (name == "float64") return torch::kFloat64;
  if (name == "int64") return torch::kInt64;
  if (name == "int32") return torch::kInt32;
  if (name == "uint8") return torch::kUInt8;
  throw FormatError("archive: unknown dtype '" + name + "'");
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(const char* b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

}  // namespace

void write_archive(const TensorArchive& archive, const std::filesystem::path& path) {
  nlohmann::json entries = nlohmann::json::array();
  std::vector<torch::Tensor> payloads;
  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : archive.tensors) {
    auto t = tensor.detach().to(torch::kCPU).contiguous();
    const auto nbytes = static_cast<std::uint64_t>(t.numel()) * t.element_size();
    entries.push_back({{"name", name},
                       {"dtype", dtype_name(t.scalar_type())},
                       {"shape", t.sizes().vec()},
                       {"offset", offset},
                       {"nbytes", nbytes}});
    offset += nbytes;
    payloads.push_back(std::move(t));
  }
  const nlohmann::json header = {
      {"format_version", kArchiveFormatVersion}, {"meta", archive.meta}, {"tensors", entries}};
  const auto text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("archive: cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : payloads) {
    out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size()));
  }
  out.flush();
  if (!out) throw IOError("archive: write failed for " + path.string());
}

TensorArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("archive: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto where = "archive " + path.string() + ": ";
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError(where + "not an fmdseg archive");
  }
  const auto header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16) throw FormatError(where + "truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + "malformed header: " + e.what());
  }

  TensorArchive archive;
  try {
    const int version = header.at("format_version").get<int>();
    if (version > kArchiveFormatVersion || version < 1) {
      throw VersionError(where + "format_version " + std::to_string(version) + " is not supported (max " +
                         std::to_string(kArchiveFormatVersion) + ")");
    }
    archive.meta = header.at("meta");
    const std::size_t payload_start = 16 + header_len;
    const std::size_t payload_size = bytes.size() - payload_start;
    for (const auto& e : header.at("tensors")) {
      const auto name = e.at("name").get<std::string>();
      const auto dtype = dtype_from_name(e.at("dtype").get<std::string>());
      const auto shape = e.at("shape").get<std::vector<std::int64_t>>();
      const auto off = e.at("offset").get<std::uint64_t>();
      const auto nbytes = e.at("nbytes").get<std::uint64_t>();
      auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype));
      if (nbytes != static_cast<std::uint64_t>(t.numel()) * t.element_size()) {
        throw FormatError(where + "tensor '" + name + "' byte count does not match its shape");
      }
      if (off > payload_size || nbytes > payload_size - off) {
        throw FormatError(where + "tensor '" + name + "' extends past end of file");
      }
      std::memcpy(t.data_ptr(), bytes.data() + payload_start + off, nbytes);
      if (!archive.tensors.emplace(name, std::move(t)).second) {
        throw FormatError(where + "duplicate tensor '" + name + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + "malformed header: " + e.what());
  }
  return archive;
}

}  // namespace fmdseg::network
