// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "fmdseg/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fmdseg/core/errors.hpp"

namespace fmdseg::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_shape(const LabelVolume& a, const LabelVolume& b, const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(where) + ": prediction " + std::to_string(a.depth()) + "x" +
                     std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs truth " +
                     std::to_string(b.depth()) + "x" + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) along one line:
// out[q] = min_p f[p] + (s (q - p))^2, skipping +inf samples.
void distance_1d(const double* f, double* out, std::int64_t n, std::int64_t stride, double s,
                 std::vector<std::int64_t>& v, std::vector<double>& z) {
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  std::int64_t k = -1;
  auto pos = [s](std::int64_t i) { return s * static_cast<double>(i); };
  for (std::int64_t q = 0; q < n; ++q) {
    const double fq = f[q * stride];
    if (fq == kInf) continue;
    const double xq = pos(q);
    while (k >= 0) {
      const auto p = v[static_cast<std::size_t>(k)];
      const double xp = pos(p);
      const double inter = ((fq + xq * xq) - (f[p * stride] + xp * xp)) / (2.0 * (xq - xp));
      if (inter <= z[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    if (k == 0) {
      z[0] = -kInf;
    } else {
      const auto p = v[static_cast<std::size_t>(k - 1)];
      const double xp = pos(p);
      z[static_cast<std::size_t>(k)] = ((fq + xq * xq) - (f[p * stride] + xp * xp)) / (2.0 * (xq - xp));
    }
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) {
    for (std::int64_t q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    const double xq = pos(q);
    while (z[static_cast<std::size_t>(j) + 1] < xq) ++j;
    const auto p = v[static_cast<std::size_t>(j)];
    const double d = s * static_cast<double>(q - p);
    out[q] = f[p * stride] + d * d;
  }
}

// Distances from each point of `from` to the nearest point of `to`, both on
// a grid whose origin is `origin` and extent `extent`.
std::vector<double> directed_distances(const std::vector<Point>& from, const std::vector<Point>& to,
                                       const Point& origin, const Point& extent, const Spacing& spacing) {
  std::vector<std::uint8_t> feature(static_cast<std::size_t>(extent[0] * extent[1] * extent[2]), 0);
  auto offset = [&](const Point& p) {
    return ((p[0] - origin[0]) * extent[1] + (p[1] - origin[1])) * extent[2] + (p[2] - origin[2]);
  };
  for (const auto& p : to) feature[static_cast<std::size_t>(offset(p))] = 1;
  const auto dt = squared_distance_transform(feature, extent[0], extent[1], extent[2], spacing);
  std::vector<double> out;
  out.reserve(from.size());
  for (const auto& p : from) out.push_back(std::sqrt(dt[static_cast<std::size_t>(offset(p))]));
  return out;
}

}  // namespace

double dsc(const LabelVolume& prediction, const LabelVolume& truth, int label) {
  require_same_shape(prediction, truth, "dsc");
  const auto l = static_cast<std::uint8_t>(label);
  std::int64_t p = 0, t = 0, both = 0;
  const auto& pd = prediction.data();
  const auto& td = truth.data();
  for (std::size_t i = 0; i < pd.size(); ++i) {
    const bool in_p = pd[i] == l;
    const bool in_t = td[i] == l;
    p += in_p;
    t += in_t;
    both += in_p && in_t;
  }
  if (p + t == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + t);
}

std::vector<Point> boundary_points(const LabelVolume& volume, int label) {
  const auto l = static_cast<std::uint8_t>(label);
  const auto d = volume.depth(), h = volume.height(), w = volume.width();
  const bool use_z = d > 1;
  auto outside = [&](std::int64_t z, std::int64_t y, std::int64_t x) {
    if (z < 0 || z >= d || y < 0 || y >= h || x < 0 || x >= w) return true;
    return volume.at(z, y, x) != l;
  };
  std::vector<Point> points;
  for (std::int64_t z = 0; z < d; ++z) {
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        if (volume.at(z, y, x) != l) continue;
        const bool edge = outside(z, y - 1, x) || outside(z, y + 1, x) || outside(z, y, x - 1) ||
                          outside(z, y, x + 1) || (use_z && (outside(z - 1, y, x) || outside(z + 1, y, x)));
        if (edge) points.push_back({z, y, x});
      }
    }
  }
  return points;
}

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature, std::int64_t depth,
                                               std::int64_t height, std::int64_t width, const Spacing& spacing) {
  const auto n = depth * height * width;
  if (static_cast<std::int64_t>(feature.size()) != n) throw ShapeError("squared_distance_transform: size mismatch");
  std::vector<double> a(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = feature[static_cast<std::size_t>(i)] ? 0.0 : kInf;
  std::vector<double> b(a.size());
  std::vector<double> line_in, line_out;
  std::vector<std::int64_t> v;
  std::vector<double> z;

  auto pass = [&](std::int64_t len, std::int64_t stride, double s, auto for_each_line) {
    line_in.resize(static_cast<std::size_t>(len));
    line_out.resize(static_cast<std::size_t>(len));
    for_each_line([&](std::int64_t start) {
      for (std::int64_t i = 0; i < len; ++i) line_in[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(start + i * stride)];
      distance_1d(line_in.data(), line_out.data(), len, 1, s, v, z);
      for (std::int64_t i = 0; i < len; ++i) b[static_cast<std::size_t>(start + i * stride)] = line_out[static_cast<std::size_t>(i)];
    });
    std::swap(a, b);
  };
  const auto plane = height * width;
  pass(width, 1, spacing.x, [&](auto f) {
    for (std::int64_t zz = 0; zz < depth; ++zz)
      for (std::int64_t y = 0; y < height; ++y) f(zz * plane + y * width);
  });
  pass(height, width, spacing.y, [&](auto f) {
    for (std::int64_t zz = 0; zz < depth; ++zz)
      for (std::int64_t x = 0; x < width; ++x) f(zz * plane + x);
  });
  if (depth > 1) {
    pass(depth, plane, spacing.z, [&](auto f) {
      for (std::int64_t i = 0; i < plane; ++i) f(i);
    });
  }
  return a;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyMaskError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

HausdorffDistances hausdorff(const std::vector<Point>& a, const std::vector<Point>& b, const Spacing& spacing) {
  if (a.empty() || b.empty()) throw EmptyMaskError("hausdorff: boundary point set is empty");
  Point lo = a.front(), hi = a.front();
  for (const auto* set : {&a, &b}) {
    for (const auto& p : *set) {
      for (std::size_t i = 0; i < 3; ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    }
  }
  const Point extent = {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  auto ab = directed_distances(a, b, lo, extent, spacing);
  const auto ba = directed_distances(b, a, lo, extent, spacing);
  HausdorffDistances r;
  r.hd = std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
  ab.insert(ab.end(), ba.begin(), ba.end());
  r.hd95 = percentile(std::move(ab), 95.0);
  return r;
}

HausdorffDistances hausdorff(const LabelVolume& prediction, const LabelVolume& truth, int label,
                             const Spacing& spacing) {
  require_same_shape(prediction, truth, "hausdorff");
  return hausdorff(boundary_points(prediction, label), boundary_points(truth, label), spacing);
}

double volume_diagonal(std::int64_t depth, std::int64_t height, std::int64_t width, const Spacing& spacing) {
  auto span = [](std::int64_t n, double s) { return static_cast<double>(std::max<std::int64_t>(n - 1, 0)) * s; };
  const double dz = span(depth, spacing.z), dy = span(height, spacing.y), dx = span(width, spacing.x);
  return std::sqrt(dz * dz + dy * dy + dx * dx);
}

}  // namespace fmdseg::metrics
