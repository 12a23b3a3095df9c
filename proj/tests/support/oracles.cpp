// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fmdseg::oracle {

namespace {

using cd = std::complex<double>;

// Moves (d1, d2) to the two last positions, keeping the others in order.
std::vector<std::int64_t> last_two(std::int64_t rank, std::int64_t d1, std::int64_t d2) {
  std::vector<std::int64_t> perm;
  for (std::int64_t d = 0; d < rank; ++d) {
    if (d != d1 && d != d2) perm.push_back(d);
  }
  perm.push_back(d1);
  perm.push_back(d2);
  return perm;
}

// Below this norm a gradient is treated as identically zero.
constexpr double kZeroGradient = 1e-7;

}  // namespace

torch::Tensor dft_filter(const torch::Tensor& x, std::int64_t d1, std::int64_t d2, const torch::Tensor& real,
                         const torch::Tensor& imag) {
  const auto n1 = x.size(d1), n2 = x.size(d2), h2 = n2 / 2 + 1;
  auto half_shape = x.sizes().vec();
  half_shape[static_cast<std::size_t>(d2)] = h2;
  const auto perm = last_two(x.dim(), d1, d2);
  auto xp = x.to(torch::kFloat64).permute(perm).contiguous();
  auto wr = real.to(torch::kFloat64).expand(half_shape).permute(perm).contiguous();
  auto wi = imag.to(torch::kFloat64).expand(half_shape).permute(perm).contiguous();
  auto out = torch::empty_like(xp);
  const auto planes = xp.numel() / (n1 * n2);
  const double* xs = xp.data_ptr<double>();
  const double* rs = wr.data_ptr<double>();
  const double* is = wi.data_ptr<double>();
  double* os = out.data_ptr<double>();
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<cd> spec(static_cast<std::size_t>(n1 * h2)), mid(static_cast<std::size_t>(n1 * h2));
  for (std::int64_t p = 0; p < planes; ++p) {
    const double* xv = xs + p * n1 * n2;
    // Forward DFT, kept bins 0..n2/2 of the second dim.
    for (std::int64_t k1 = 0; k1 < n1; ++k1) {
      for (std::int64_t k2 = 0; k2 < h2; ++k2) {
        cd acc = 0.0;
        for (std::int64_t a = 0; a < n1; ++a) {
          for (std::int64_t b = 0; b < n2; ++b) {
            const double ang = -two_pi * (static_cast<double>(k1 * a) / n1 + static_cast<double>(k2 * b) / n2);
            acc += xv[a * n2 + b] * cd(std::cos(ang), std::sin(ang));
          }
        }
        const auto wi_idx = p * n1 * h2 + k1 * h2 + k2;
        spec[static_cast<std::size_t>(k1 * h2 + k2)] = acc * cd(rs[wi_idx], is[wi_idx]);
      }
    }
    // Inverse along the first dim (full complex).
    for (std::int64_t a = 0; a < n1; ++a) {
      for (std::int64_t k2 = 0; k2 < h2; ++k2) {
        cd acc = 0.0;
        for (std::int64_t k1 = 0; k1 < n1; ++k1) {
          const double ang = two_pi * static_cast<double>(k1 * a) / n1;
          acc += spec[static_cast<std::size_t>(k1 * h2 + k2)] * cd(std::cos(ang), std::sin(ang));
        }
        mid[static_cast<std::size_t>(a * h2 + k2)] = acc / static_cast<double>(n1);
      }
    }
    // Real-output inverse along the halved dim.
    for (std::int64_t a = 0; a < n1; ++a) {
      for (std::int64_t b = 0; b < n2; ++b) {
        double acc = 0.0;
        for (std::int64_t k2 = 0; k2 < h2; ++k2) {
          const bool edge = k2 == 0 || (n2 % 2 == 0 && k2 == n2 / 2);
          const double ang = two_pi * static_cast<double>(k2 * b) / n2;
          const cd term = mid[static_cast<std::size_t>(a * h2 + k2)] * cd(std::cos(ang), std::sin(ang));
          acc += edge ? mid[static_cast<std::size_t>(a * h2 + k2)].real() * std::cos(ang) : 2.0 * term.real();
        }
        os[p * n1 * n2 + a * n2 + b] = acc / static_cast<double>(n2);
      }
    }
  }
  // Undo the permutation.
  std::vector<std::int64_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[static_cast<std::size_t>(perm[i])] = static_cast<std::int64_t>(i);
  return out.permute(inverse).contiguous();
}

torch::Tensor conv2d(const torch::Tensor& x_in, const torch::Tensor& w_in, const torch::Tensor& bias_in,
                     std::int64_t stride, std::int64_t padding, std::int64_t groups) {
  auto x = x_in.to(torch::kFloat64).contiguous();
  auto w = w_in.to(torch::kFloat64).contiguous();
  const auto B = x.size(0), Cin = x.size(1), H = x.size(2), W = x.size(3);
  const auto Cout = w.size(0), k = w.size(2);
  const auto cin_g = Cin / groups, cout_g = Cout / groups;
  if (w.size(1) != cin_g) throw std::invalid_argument("oracle conv2d: weight/group mismatch");
  const auto Ho = (H + 2 * padding - k) / stride + 1, Wo = (W + 2 * padding - k) / stride + 1;
  auto out = torch::zeros({B, Cout, Ho, Wo}, torch::kFloat64);
  auto xa = x.accessor<double, 4>();
  auto wa = w.accessor<double, 4>();
  auto oa = out.accessor<double, 4>();
  for (std::int64_t b = 0; b < B; ++b) {
    for (std::int64_t co = 0; co < Cout; ++co) {
      const auto g = co / cout_g;
      const double bias = bias_in.defined() ? bias_in[co].item<double>() : 0.0;
      for (std::int64_t i = 0; i < Ho; ++i) {
        for (std::int64_t j = 0; j < Wo; ++j) {
          double acc = bias;
          for (std::int64_t ci = 0; ci < cin_g; ++ci) {
            for (std::int64_t u = 0; u < k; ++u) {
              for (std::int64_t v = 0; v < k; ++v) {
                const auto y = i * stride + u - padding, xx = j * stride + v - padding;
                if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
                acc += xa[b][g * cin_g + ci][y][xx] * wa[co][ci][u][v];
              }
            }
          }
          oa[b][co][i][j] = acc;
        }
      }
    }
  }
  return out;
}

std::int64_t Mask::count() const { return std::count(data.begin(), data.end(), std::uint8_t{1}); }

double dice(const Mask& p, const Mask& t) {
  std::int64_t inter = 0, sp = 0, st = 0;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    inter += p.data[i] && t.data[i];
    sp += p.data[i];
    st += t.data[i];
  }
  if (sp + st == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(sp + st);
}

std::vector<std::array<std::int64_t, 3>> boundary(const Mask& m) {
  std::vector<std::array<std::int64_t, 3>> out;
  auto in = [&](std::int64_t z, std::int64_t y, std::int64_t x) {
    return z >= 0 && z < m.depth && y >= 0 && y < m.height && x >= 0 && x < m.width && m.at(z, y, x);
  };
  for (std::int64_t z = 0; z < m.depth; ++z) {
    for (std::int64_t y = 0; y < m.height; ++y) {
      for (std::int64_t x = 0; x < m.width; ++x) {
        if (!m.at(z, y, x)) continue;
        bool edge = !in(z, y - 1, x) || !in(z, y + 1, x) || !in(z, y, x - 1) || !in(z, y, x + 1);
        if (m.depth > 1) edge = edge || !in(z - 1, y, x) || !in(z + 1, y, x);
        if (edge) out.push_back({z, y, x});
      }
    }
  }
  return out;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

Hausdorff hausdorff(const Mask& p, const Mask& t, std::array<double, 3> spacing) {
  const auto a = boundary(p), b = boundary(t);
  if (a.empty() || b.empty()) throw std::invalid_argument("oracle hausdorff: empty boundary");
  auto nearest = [&](const std::vector<std::array<std::int64_t, 3>>& from,
                     const std::vector<std::array<std::int64_t, 3>>& to) {
    std::vector<double> d;
    for (const auto& u : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : to) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double diff = static_cast<double>(u[k] - v[k]) * spacing[static_cast<std::size_t>(k)];
          s += diff * diff;
        }
        best = std::min(best, s);
      }
      d.push_back(std::sqrt(best));
    }
    return d;
  };
  auto ab = nearest(a, b), ba = nearest(b, a);
  Hausdorff h;
  h.hd = std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
  ab.insert(ab.end(), ba.begin(), ba.end());
  h.hd95 = percentile(ab, 95.0);
  return h;
}

Mask random_mask(std::mt19937_64& rng, std::int64_t depth, std::int64_t height, std::int64_t width, double density) {
  Mask m;
  m.depth = depth;
  m.height = height;
  m.width = width;
  std::bernoulli_distribution bit(density);
  m.data.resize(static_cast<std::size_t>(depth * height * width));
  for (auto& v : m.data) v = bit(rng) ? 1 : 0;
  return m;
}

std::vector<double> gradient_errors(const std::function<torch::Tensor()>& f, const std::vector<torch::Tensor>& inputs,
                                    double step) {
  for (const auto& t : inputs) {
    if (t.scalar_type() != torch::kFloat64) throw std::invalid_argument("gradient check needs float64 inputs");
    if (t.grad().defined()) t.mutable_grad().zero_();
  }
  auto y = f();
  const auto analytic = torch::autograd::grad({y}, inputs, {}, false, false, /*allow_unused=*/true);
  std::vector<double> errors;
  torch::NoGradGuard no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto flat = inputs[i].view({-1});
    auto numeric = torch::zeros_like(flat);
    for (std::int64_t j = 0; j < flat.numel(); ++j) {
      const double orig = flat[j].item<double>();
      flat[j] = orig + step;
      const double up = f().item<double>();
      flat[j] = orig - step;
      const double down = f().item<double>();
      flat[j] = orig;
      numeric[j] = (up - down) / (2.0 * step);
    }
    auto a = analytic[i].defined() ? analytic[i].reshape({-1}) : torch::zeros_like(flat);
    const double diff = (a - numeric).norm().item<double>();
    const double scale = std::max(a.norm().item<double>(), numeric.norm().item<double>());
    // A structurally zero gradient (e.g. a bias the output is invariant to)
    // leaves only rounding noise on both sides; compare it absolutely.
    errors.push_back(scale < kZeroGradient ? diff : diff / scale);
  }
  return errors;
}

double max_gradient_error(const std::function<torch::Tensor()>& f, const std::vector<torch::Tensor>& inputs,
                          double step) {
  const auto e = gradient_errors(f, inputs, step);
  return e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
}

}  // namespace fmdseg::oracle
