// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/data/volume.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/organ.hpp"
#include "fmdseg/data/array_io.hpp"

namespace fmdseg::data {

namespace fs = std::filesystem;

void validate_case(const CaseVolume& c) {
  const auto where = "case " + c.id + ": ";
  if (!c.image.defined() || c.image.dim() != 3) throw FormatError(where + "image must be rank 3 (slices, H, W)");
  if (!c.labels.defined() || c.labels.sizes() != c.image.sizes()) {
    throw FormatError(where + "labels must have the image's shape");
  }
  if (c.labels.is_floating_point()) throw FormatError(where + "labels must be integers");
  if (!(c.spacing.z > 0 && c.spacing.y > 0 && c.spacing.x > 0)) throw FormatError(where + "spacing must be positive");
  const auto bad = (c.labels < 0).logical_or(c.labels >= kNumClasses);
  if (bad.any().item<bool>()) {
    const auto per_slice = bad.flatten(1).any(1);
    const auto slice = per_slice.nonzero()[0][0].item<std::int64_t>();
    const auto value = c.labels[slice].masked_select(bad[slice])[0].item<std::int64_t>();
    throw LabelRangeError(where + "label value " + std::to_string(value) + " outside 0..8 in slice " +
                              std::to_string(slice),
                          slice);
  }
}

fs::path case_dir(const fs::path& root, const std::string& id) { return root / "cases" / id; }

CaseVolume load_case(const fs::path& dir) {
  CaseVolume c;
  c.id = dir.filename().string();
  if (c.id.empty()) c.id = dir.parent_path().filename().string();
  for (const char* name : {"image.arr", "label.arr", "spacing.txt"}) {
    if (!fs::is_regular_file(dir / name)) throw FormatError("case " + c.id + ": missing " + (dir / name).string());
  }
  c.image = read_array(dir / "image.arr").to(torch::kFloat32);
  auto labels = read_array(dir / "label.arr");
  if (labels.is_floating_point()) {
    if (!labels.eq(labels.round()).all().item<bool>()) {
      throw FormatError("case " + c.id + ": label volume holds non-integer values");
    }
  }
  c.labels = labels.to(torch::kLong);

  std::ifstream in(dir / "spacing.txt");
  double z = 0, y = 0, x = 0;
  if (!(in >> z >> y >> x)) throw FormatError("case " + c.id + ": spacing.txt must hold three numbers 'z y x'");
  c.spacing = {z, y, x};
  validate_case(c);
  return c;
}

void save_case(const CaseVolume& c, const fs::path& root) {
  validate_case(c);
  const auto dir = case_dir(root, c.id);
  fs::create_directories(dir);
  write_array(c.image.to(torch::kFloat32), dir / "image.arr");
  write_array(c.labels.to(torch::kUInt8), dir / "label.arr");
  std::ofstream out(dir / "spacing.txt");
  out.precision(17);
  out << c.spacing.z << ' ' << c.spacing.y << ' ' << c.spacing.x << '\n';
  if (!out) throw IOError("cannot write " + (dir / "spacing.txt").string());
}

namespace {

std::vector<std::string> read_ids(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open split file " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(b, e - b + 1));
  }
  return ids;
}

void write_ids(const std::vector<std::string>& ids, const fs::path& path) {
  std::ofstream out(path);
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw IOError("cannot write " + path.string());
}

}  // namespace

void validate_split(const DatasetSplit& split) {
  std::set<std::string> seen;
  for (const auto* list : {&split.train_cases, &split.test_cases}) {
    for (const auto& id : *list) {
      if (!seen.insert(id).second) {
        throw DataError("split: case '" + id + "' appears more than once across train/test");
      }
    }
  }
}

DatasetSplit load_split(const fs::path& dir) {
  DatasetSplit s;
  s.train_cases = read_ids(dir / "train.txt");
  s.test_cases = read_ids(dir / "test.txt");
  validate_split(s);
  return s;
}

void save_split(const DatasetSplit& split, const fs::path& dir) {
  validate_split(split);
  fs::create_directories(dir);
  write_ids(split.train_cases, dir / "train.txt");
  write_ids(split.test_cases, dir / "test.txt");
}

std::vector<CaseVolume> load_cases(const fs::path& root, const std::vector<std::string>& ids) {
  std::vector<CaseVolume> cases;
  cases.reserve(ids.size());
  for (const auto& id : ids) cases.push_back(load_case(case_dir(root, id)));
  return cases;
}

std::int64_t total_slices(const std::vector<CaseVolume>& cases) {
  std::int64_t n = 0;
  for (const auto& c : cases) n += c.slices();
  return n;
}

}  // namespace fmdseg::data
