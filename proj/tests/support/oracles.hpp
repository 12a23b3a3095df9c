// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used as test oracles. Nothing here
// calls into the library code it is meant to check.

#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fmdseg::oracle {

/// Quadratic-cost 2D DFT filter over dims (d1, d2) of a real tensor:
/// forward DFT, multiply by the half spectrum weight (real, imag), inverse
/// with the real-output convention (Hermitian extension of the halved dim
/// d2, the imaginary parts of its DC and Nyquist bins discarded).
/// Weights broadcast to x's shape with d2 replaced by n2/2+1.
torch::Tensor dft_filter(const torch::Tensor& x, std::int64_t d1, std::int64_t d2, const torch::Tensor& real,
                         const torch::Tensor& imag);

/// Direct sliding-window cross-correlation, zero padding, grouped.
/// x: (B, Cin, H, W), w: (Cout, Cin/groups, k, k), bias optional.
torch::Tensor conv2d(const torch::Tensor& x, const torch::Tensor& w, const torch::Tensor& bias, std::int64_t stride,
                     std::int64_t padding, std::int64_t groups);

/// Binary masks on a (depth, height, width) grid, C order.
struct Mask {
  std::int64_t depth = 1, height = 1, width = 1;
  std::vector<std::uint8_t> data;
  std::uint8_t at(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return data[static_cast<std::size_t>((z * height + y) * width + x)];
  }
  std::int64_t count() const;
};

double dice(const Mask& p, const Mask& t);

/// Mask voxels with a face neighbour outside the mask or outside the grid;
/// z neighbours only count when depth > 1.
std::vector<std::array<std::int64_t, 3>> boundary(const Mask& m);

struct Hausdorff {
  double hd = 0.0;
  double hd95 = 0.0;
};
/// All-pairs boundary Hausdorff distance with per-axis spacing (z, y, x).
/// hd95 is the linear-interpolation 95th percentile over both directed
/// nearest-distance lists pooled together.
Hausdorff hausdorff(const Mask& p, const Mask& t, std::array<double, 3> spacing);

/// Linear-interpolation percentile (numpy default).
double percentile(std::vector<double> v, double q);

Mask random_mask(std::mt19937_64& rng, std::int64_t depth, std::int64_t height, std::int64_t width, double density);

/// Central-difference check of d f / d inputs for a scalar f.
/// Returns, per input, ||analytic - numeric|| / max(||analytic||, ||numeric||),
/// or the absolute difference when both norms are below 1e-7.
/// Inputs must be float64 leaf tensors; they are perturbed in place and restored.
std::vector<double> gradient_errors(const std::function<torch::Tensor()>& f, const std::vector<torch::Tensor>& inputs,
                                    double step = 1e-5);

/// Maximum of gradient_errors.
double max_gradient_error(const std::function<torch::Tensor()>& f, const std::vector<torch::Tensor>& inputs,
                          double step = 1e-5);

/// Scalar heavy-ball SGD with L2 decay, evaluated one operation at a time.
struct ScalarSgd {
  double p, v = 0.0, lr, mu, wd;
  void step(double g) {
    const double d = g + p * wd;
    v = v * mu;
    v = v + d;
    p = p - v * lr;
  }
};

}  // namespace fmdseg::oracle
