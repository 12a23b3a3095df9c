// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/data/phantom.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "fmdseg/core/errors.hpp"
#include "fmdseg/core/organ.hpp"
#include "fmdseg/data/augment.hpp"

namespace fmdseg::data {

namespace {

struct Ellipse {
  double cy, cx, ry, rx, angle;
};

struct OrganStyle {
  Organ organ;
  double mean_hu;
  double sigma_hu;
};

// Means chosen so touching organs overlap within about two sigma; bile sits
// below soft tissue so the gallbladder is separable by intensity.
constexpr OrganStyle kStyles[] = {
    {Organ::liver, 60.0, 14.0},   {Organ::spleen, 50.0, 14.0},       {Organ::pancreas, 42.0, 14.0},
    {Organ::stomach, 18.0, 14.0}, {Organ::gallbladder, -60.0, 10.0},   {Organ::kidney_left, 150.0, 18.0},
    {Organ::kidney_right, 150.0, 18.0}, {Organ::aorta, 190.0, 18.0},
};
constexpr double kTissueHu = 5.0;
constexpr double kTissueSigma = 14.0;
constexpr double kAirHu = -1000.0;

bool inside(const Ellipse& e, double y, double x) {
  const double c = std::cos(e.angle), s = std::sin(e.angle);
  const double dy = y - e.cy, dx = x - e.cx;
  const double u = (c * dx + s * dy) / e.rx;
  const double v = (-s * dx + c * dy) / e.ry;
  return u * u + v * v <= 1.0;
}

double jitter(Rng& rng, double amplitude) { return (2.0 * uniform01(rng) - 1.0) * amplitude; }

}  // namespace

std::string phantom_case_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "phantom%03d", index);
  return buf;
}

std::vector<CaseVolume> make_synthetic_phantom(int n_cases, std::uint64_t seed, const PhantomOptions& options) {
  if (n_cases < 1) throw ConfigError("make_synthetic_phantom: need at least one case");
  if (options.slices < 1 || options.size < 64) throw ConfigError("make_synthetic_phantom: volume too small");
  const auto n = options.size;
  const double u = static_cast<double>(n) / 224.0;  // layout is authored on a 224 grid
  std::vector<CaseVolume> cases;
  for (int index = 0; index < n_cases; ++index) {
    Rng rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(index) + 1);
    // Per-case layout jitter (pixels on the 224 grid) and size scale.
    const double dy = jitter(rng, 6), dx = jitter(rng, 6);
    const double scale = 0.92 + 0.16 * uniform01(rng);
    const double tilt = jitter(rng, 0.25);
    const double phase = uniform01(rng) * 2.0 * std::numbers::pi;
    const double pancreas_wave = 4.0 + 3.0 * uniform01(rng);

    CaseVolume c;
    c.id = phantom_case_id(index);
    c.spacing = {2.5, 0.8 / u, 0.8 / u};
    auto image = torch::empty({options.slices, n, n}, torch::kFloat32);
    auto labels = torch::zeros({options.slices, n, n}, torch::kLong);
    auto gen = at::make_generator<at::CPUGeneratorImpl>(rng());

    for (std::int64_t z = 0; z < options.slices; ++z) {
      // Organs swell and shrink smoothly along z.
      const double t = options.slices == 1 ? 0.0 : static_cast<double>(z) / static_cast<double>(options.slices - 1);
      const double breathe = 1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * t + phase);
      auto px = [&](double v) { return v * u; };
      auto r = [&](double v) { return v * u * scale * breathe; };
      const Ellipse body{px(112 + dy), px(112 + dx), px(92), px(104), 0.0};
      const std::pair<Organ, Ellipse> blobs[] = {
          {Organ::liver, {px(92 + dy), px(68 + dx), r(46), r(36), 0.35 + tilt}},
          {Organ::stomach, {px(78 + dy), px(150 + dx), r(22), r(28), -0.3 + tilt}},
          {Organ::spleen, {px(116 + dy), px(182 + dx), r(24), r(14), 0.2}},
          {Organ::kidney_right, {px(150 + dy), px(66 + dx), r(18), r(12), 0.25}},
          {Organ::kidney_left, {px(150 + dy), px(158 + dx), r(18), r(12), -0.25}},
          {Organ::aorta, {px(146 + dy), px(112 + dx), r(8), r(8), 0.0}},
          {Organ::gallbladder, {px(128 + dy), px(100 + dx), r(10), r(7), 0.6}},
      };
      auto lab = labels[z];
      auto acc = lab.accessor<std::int64_t, 2>();
      for (std::int64_t y = 0; y < n; ++y) {
        for (std::int64_t x = 0; x < n; ++x) {
          const double yy = static_cast<double>(y), xx = static_cast<double>(x);
          if (!inside(body, yy, xx)) continue;
          int label = 0;
          for (const auto& [organ, e] : blobs) {
            if (inside(e, yy, xx)) {
              label = organ_id(organ);
              break;
            }
          }
          if (label == 0) {
            // Pancreas: thin wavy band between the stomach and the kidneys.
            const double bx0 = px(112 + dx), bx1 = px(160 + dx);
            if (xx >= bx0 && xx <= bx1) {
              const double phase_x = (xx - bx0) / (bx1 - bx0);
              const double centre =
                  px(114 + dy) + px(pancreas_wave) * std::sin(2.0 * std::numbers::pi * phase_x * 1.25 + phase);
              const double half = r(4.5) * (1.0 - 0.35 * phase_x);
              if (std::abs(yy - centre) <= half) label = organ_id(Organ::pancreas);
            }
          }
          acc[y][x] = label == 0 ? -1 : label;  // -1 marks soft tissue inside the body
        }
      }
      // Intensities: one noise field per slice, mean and spread by region.
      auto noise = torch::randn({n, n}, gen, torch::kFloat32);
      auto mean = torch::full({n, n}, kAirHu, torch::kFloat32);
      auto sigma = torch::zeros({n, n}, torch::kFloat32);
      mean.masked_fill_(lab.eq(-1), kTissueHu);
      sigma.masked_fill_(lab.eq(-1), kTissueSigma);
      for (const auto& s : kStyles) {
        const auto m = lab.eq(organ_id(s.organ));
        mean.masked_fill_(m, s.mean_hu);
        sigma.masked_fill_(m, s.sigma_hu);
      }
      image[z] = mean + sigma * noise;
      lab.clamp_min_(0);
    }
    c.image = image;
    c.labels = labels;
    validate_case(c);
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace fmdseg::data
