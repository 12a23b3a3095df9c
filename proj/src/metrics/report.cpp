// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/metrics/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/metrics/metrics.hpp"

namespace fmdseg::metrics {

namespace F = torch::nn::functional;

bool CaseReport::flagged() const noexcept {
  for (const auto& o : organs) {
    if (o.flagged()) return true;
  }
  return false;
}

CaseReport score_case(const LabelVolume& prediction, const LabelVolume& truth, const Spacing& spacing,
                      std::string case_id) {
  if (!prediction.same_shape(truth)) throw ShapeError("score_case: prediction and truth shapes differ");
  CaseReport r;
  r.case_id = std::move(case_id);
  const Spacing unit{};
  double dsc_sum = 0, hd_sum = 0;
  int defined = 0;
  for (const auto organ : kOrgans) {
    const int label = organ_id(organ);
    auto& s = r.organs[static_cast<std::size_t>(label - 1)];
    s.prediction_empty = prediction.count(label) == 0;
    s.truth_empty = truth.count(label) == 0;
    if (!s.defined()) continue;
    if (s.flagged()) {
      s.dsc = 0.0;
      s.hd = s.hd95 = volume_diagonal(truth.depth(), truth.height(), truth.width(), spacing);
      s.hd_voxel = s.hd95_voxel = volume_diagonal(truth.depth(), truth.height(), truth.width(), unit);
    } else {
      s.dsc = dsc(prediction, truth, label);
      const auto a = boundary_points(prediction, label);
      const auto b = boundary_points(truth, label);
      const auto mm = hausdorff(a, b, spacing);
      const auto vox = spacing == unit ? mm : hausdorff(a, b, unit);
      s.hd = mm.hd;
      s.hd95 = mm.hd95;
      s.hd_voxel = vox.hd;
      s.hd95_voxel = vox.hd95;
    }
    dsc_sum += s.dsc;
    hd_sum += s.hd;
    ++defined;
  }
  if (defined > 0) {
    r.mean_dsc = dsc_sum / defined;
    r.mean_hd = hd_sum / defined;
  }
  return r;
}

torch::Tensor predict_labels(const torch::Tensor& logits, std::int64_t height, std::int64_t width) {
  auto l = logits.dim() == 4 ? logits.squeeze(0) : logits;
  if (l.dim() != 3) throw ShapeError("predict_labels: expected (C, H, W) logits");
  auto labels = l.argmax(0);
  if (labels.size(0) != height || labels.size(1) != width) {
    labels = F::interpolate(labels.to(torch::kFloat).unsqueeze(0).unsqueeze(0),
                            F::InterpolateFuncOptions()
                                .size(std::vector<std::int64_t>{height, width})
                                .mode(torch::kNearest))
                 .squeeze(0)
                 .squeeze(0)
                 .to(torch::kLong);
  }
  return labels;
}

CaseReport evaluate_case(const std::vector<torch::Tensor>& slice_logits, const LabelVolume& truth,
                         const Spacing& spacing, std::string case_id) {
  if (static_cast<std::int64_t>(slice_logits.size()) != truth.depth()) {
    throw MissingSliceError("evaluate_case " + case_id + ": " + std::to_string(slice_logits.size()) +
                            " slices predicted for a volume of depth " + std::to_string(truth.depth()));
  }
  std::vector<torch::Tensor> planes;
  planes.reserve(slice_logits.size());
  for (const auto& logits : slice_logits) {
    if (!logits.defined()) throw MissingSliceError("evaluate_case " + case_id + ": undefined slice");
    planes.push_back(predict_labels(logits.detach().to(torch::kCPU), truth.height(), truth.width()));
  }
  const auto prediction = planes.empty() ? LabelVolume(0, truth.height(), truth.width())
                                         : LabelVolume::from_tensor(torch::stack(planes));
  return score_case(prediction, truth, spacing, std::move(case_id));
}

EvalReport aggregate(std::string name, std::vector<CaseReport> cases) {
  EvalReport r;
  r.name = std::move(name);
  r.case_count = static_cast<int>(cases.size());
  for (std::size_t k = 0; k < kNumOrgans; ++k) {
    auto& s = r.per_organ[k];
    double dsc_sum = 0, hd = 0, hd95 = 0, hdv = 0, hd95v = 0;
    for (const auto& c : cases) {
      const auto& o = c.organs[k];
      if (o.flagged()) ++s.flagged_cases;
      if (!o.defined()) continue;
      ++s.defined_cases;
      dsc_sum += o.dsc;
      hd += o.hd;
      hd95 += o.hd95;
      hdv += o.hd_voxel;
      hd95v += o.hd95_voxel;
    }
    r.flagged_entries += s.flagged_cases;
    if (s.defined_cases > 0) {
      const double n = s.defined_cases;
      s.dsc_pct = 100.0 * dsc_sum / n;
      s.hd = hd / n;
      s.hd95 = hd95 / n;
      s.hd_voxel = hdv / n;
      s.hd95_voxel = hd95v / n;
    }
  }
  double dsc_sum = 0, hd = 0, hd95 = 0;
  for (const auto& s : r.per_organ) {
    dsc_sum += s.dsc_pct;
    hd += s.hd;
    hd95 += s.hd95;
  }
  r.mean_dsc_pct = dsc_sum / kNumOrgans;
  r.mean_hd = hd / kNumOrgans;
  r.mean_hd95 = hd95 / kNumOrgans;
  r.cases = std::move(cases);
  return r;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::string Table::to_markdown() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    out << '|';
    for (const auto& c : cells) out << ' ' << c << " |";
    out << '\n';
  };
  line(header);
  out << '|';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i == 0 ? " --- |" : " ---: |");
  out << '\n';
  for (const auto& r : rows) line(r);
  return out.str();
}

void Table::write(const std::filesystem::path& stem) const {
  for (const auto& [ext, text] : {std::pair{".csv", to_csv()}, std::pair{".md", to_markdown()}}) {
    auto path = stem;
    path += ext;
    std::ofstream out(path);
    if (!out) throw IOError("cannot write " + path.string());
    out << text;
  }
}

Table table1(const std::vector<EvalReport>& reports) {
  Table t;
  t.header = {"Model", "DSC(%)", "HD(mm)"};
  for (const auto organ : kOrgans) t.header.emplace_back(organ_title(organ));
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.name, format_fixed(r.mean_dsc_pct), format_fixed(r.mean_hd)};
    for (const auto& s : r.per_organ) row.push_back(format_fixed(s.dsc_pct));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table table2(const std::vector<EvalReport>& reports) {
  Table t;
  t.header = {"Model", "Average DSC", "Average HD"};
  for (const auto organ : kOrgans) {
    t.header.push_back(std::string(organ_title(organ)) + " DSC");
    t.header.push_back(std::string(organ_title(organ)) + " HD");
  }
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.name, format_fixed(r.mean_dsc_pct), format_fixed(r.mean_hd)};
    for (const auto& s : r.per_organ) {
      row.push_back(format_fixed(s.dsc_pct));
      row.push_back(format_fixed(s.hd));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table table3(const std::vector<SkipAblationRow>& rows) {
  Table t;
  t.header = {"Block", "1st layer", "2nd layer", "3rd layer", "DSC(%)", "HD(mm)"};
  for (const auto& r : rows) {
    std::vector<std::string> row = {"DA+ block"};
    for (int layer = 1; layer <= 3; ++layer) row.emplace_back(r.layers.contains(layer) ? "✓" : "");
    row.push_back(format_fixed(r.report.mean_dsc_pct));
    row.push_back(format_fixed(r.report.mean_hd));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table case_detail(const EvalReport& report) {
  Table t;
  t.header = {"case", "organ", "dsc_pct", "hd_mm", "hd95_mm", "hd_voxel", "hd95_voxel", "defined", "flagged"};
  for (const auto& c : report.cases) {
    for (const auto organ : kOrgans) {
      const auto& o = c.organs[static_cast<std::size_t>(organ_id(organ) - 1)];
      t.rows.push_back({c.case_id, std::string(organ_name(organ)), format_fixed(100.0 * o.dsc, 4),
                        format_fixed(o.hd, 4), format_fixed(o.hd95, 4), format_fixed(o.hd_voxel, 4),
                        format_fixed(o.hd95_voxel, 4), o.defined() ? "1" : "0", o.flagged() ? "1" : "0"});
    }
  }
  return t;
}

}  // namespace fmdseg::metrics
