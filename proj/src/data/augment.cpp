// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/data/augment.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::data {

namespace F = torch::nn::functional;

std::string save_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng load_rng(const std::string& state) {
  Rng rng;
  std::istringstream in(state);
  in >> rng;
  if (in.fail()) throw FormatError("rng state is malformed");
  return rng;
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

torch::Tensor rotate(const torch::Tensor& map, double degrees, bool nearest) {
  if (map.dim() != 2) throw ShapeError("rotate: expected a 2D map");
  const double turns = degrees / 90.0;
  if (turns == std::round(turns)) {
    const auto k = static_cast<std::int64_t>(std::round(turns));
    if (k % 4 == 0) return map.clone();
    if (k % 2 == 0) return map.flip({0, 1});
    if (map.size(0) == map.size(1)) return torch::rot90(map, k, {0, 1}).contiguous();
  }
  const auto h = map.size(0), w = map.size(1);
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  // Inverse map: output pixel -> source pixel, in align_corners=true coords.
  auto ys = torch::arange(h, torch::kFloat64).view({h, 1}) - cy;
  auto xs = torch::arange(w, torch::kFloat64).view({1, w}) - cx;
  auto src_x = cx + c * xs - s * ys;
  auto src_y = cy + s * xs + c * ys;
  auto gx = 2.0 * src_x / std::max<double>(w - 1, 1) - 1.0;
  auto gy = 2.0 * src_y / std::max<double>(h - 1, 1) - 1.0;
  auto grid = torch::stack({gx.expand({h, w}), gy.expand({h, w})}, -1).unsqueeze(0).to(torch::kFloat32);
  auto input = map.to(torch::kFloat32).unsqueeze(0).unsqueeze(0);
  auto opts = F::GridSampleFuncOptions().padding_mode(torch::kZeros).align_corners(true);
  if (nearest) {
    opts.mode(torch::kNearest);
  } else {
    opts.mode(torch::kBilinear);
  }
  auto out = F::grid_sample(input, grid, opts)
                 .squeeze(0)
                 .squeeze(0);
  return nearest ? out.round().to(map.scalar_type()) : out.to(map.scalar_type());
}

AugmentedPair augment(const torch::Tensor& image, const torch::Tensor& labels, const AugmentationConfig& config,
                      Rng& rng) {
  if (image.dim() != 2 || labels.sizes() != image.sizes()) {
    throw ShapeError("augment: image and labels must be matching 2D maps");
  }
  const double angle = (2.0 * uniform01(rng) - 1.0) * config.rotation_max_deg;
  const bool flip_x = uniform01(rng) < config.flip_prob;
  const bool flip_y = uniform01(rng) < config.flip_prob;
  const double contrast = config.contrast_min + (config.contrast_max - config.contrast_min) * uniform01(rng);
  const auto noise_seed = rng();

  auto img = image.to(torch::kFloat32);
  auto lab = labels.to(torch::kLong);
  if (config.enabled) {
    if (angle != 0.0) {
      img = rotate(img, angle, false);
      lab = rotate(lab, angle, true);
    }
    if (flip_x) {
      img = img.flip({1});
      lab = lab.flip({1});
    }
    if (flip_y) {
      img = img.flip({0});
      lab = lab.flip({0});
    }
    if (contrast != 1.0) {
      const auto mean = img.mean();
      img = (img - mean) * contrast + mean;
    }
    if (config.noise_sigma > 0.0) {
      auto gen = at::make_generator<at::CPUGeneratorImpl>(noise_seed);
      img = img + torch::randn(img.sizes(), gen, torch::kFloat32) * config.noise_sigma;
    }
  }
  return {img.contiguous(), lab.contiguous()};
}

}  // namespace fmdseg::data
