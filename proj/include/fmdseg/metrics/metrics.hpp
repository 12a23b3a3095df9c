// Copyright 2026 The fmdseg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fmdseg/metrics/label_volume.hpp"

namespace fmdseg::metrics {

/// 2 |P n T| / (|P| + |T|) over the voxels labelled `label`; 1 when both are
/// empty. ShapeError on a shape mismatch.
double dsc(const LabelVolume& prediction, const LabelVolume& truth, int label);

/// Integer voxel coordinates (z, y, x).
using Point = std::array<std::int64_t, 3>;

/// Voxels of `label` with at least one 4-connected (2D) or 6-connected (3D)
/// neighbour outside the mask. Out-of-volume neighbours count as outside;
/// z-neighbours are only considered when depth > 1. Sorted in C order.
std::vector<Point> boundary_points(const LabelVolume& volume, int label);

struct HausdorffDistances {
  double hd = 0.0;
  // 95th percentile (linear interpolation between order statistics) of the
  // pooled set of both directed nearest-boundary distances.
  double hd95 = 0.0;
};

/// Symmetric Hausdorff distance between two point sets that live on the
/// same voxel grid of extent `shape` (depth, height, width), in spacing units.
/// Computed from exact anisotropic Euclidean distance transforms over the
/// joint bounding box. Throws EmptyMaskError if either set is empty.
HausdorffDistances hausdorff(const std::vector<Point>& a, const std::vector<Point>& b, const Spacing& spacing);

/// Boundary Hausdorff distance between the `label` masks of two volumes.
/// Throws EmptyMaskError if either mask is empty, ShapeError on mismatch.
HausdorffDistances hausdorff(const LabelVolume& prediction, const LabelVolume& truth, int label,
                             const Spacing& spacing);

/// Squared Euclidean distance from every grid point to the nearest feature
/// voxel (feature[i] != 0), with physical spacing. Grid is (depth, height,
/// width) C order; +inf everywhere when there are no features.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& feature, std::int64_t depth,
                                               std::int64_t height, std::int64_t width, const Spacing& spacing);

/// Largest centre-to-centre distance inside a volume of this shape.
double volume_diagonal(std::int64_t depth, std::int64_t height, std::int64_t width, const Spacing& spacing);

/// Linear-interpolation percentile (q in [0, 100]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

}  // namespace fmdseg::metrics
