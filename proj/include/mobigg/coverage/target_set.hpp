#pragma once

#include <cstddef>
#include <vector>

#include "mobigg/core/geometry.hpp"

namespace mobigg::coverage {

enum class TargetKind { Point, Segment, Cube, CantorIterate, Custom };

/// A compact set to detect or cover, discretized as an epsilon-net.
/// `epsilon` is the achieved net resolution: every point of the underlying
/// set lies within epsilon of some net point. A Point target is its own net,
/// so its resolution is 0 and covering it needs the full radius r.
struct TargetSet {
  TargetKind kind = TargetKind::Point;
  core::PointMatrix points;  // net, one row per point
  double epsilon = 0.0;      // net resolution
  double scale = 1.0;        // R in RA
  int cantor_level = 0;

  int dim() const { return static_cast<int>(points.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  core::Box bounding_box() const;
};

struct TargetParams {
  std::size_t net_cap = 20'000'000;  // refuse nets larger than this
};

/// Net points covering R*A at resolution epsilon (epsilon in (0, r) is the
/// caller's responsibility; construction only needs epsilon > 0).
///   Point:   the origin; exact net, stored resolution 0.
///   Segment: [-R/2, R/2] along axis 0.
///   Cube:    [-R/2, R/2]^d.
///   CantorIterate(k): k-th middle-thirds iterate of [0,R] (d=1) or its
///                     product with itself (d=2).
TargetSet build_target(TargetKind kind, int d, double R, double epsilon,
                       int cantor_level = 0, const TargetParams& params = {});

TargetSet custom_target(core::PointMatrix points, double epsilon);

/// Number of boxes of the given side (anchored at the net bounding box
/// corner) that contain a net point.
std::size_t box_count(const TargetSet& set, double box_side);

/// Least-squares slope of log(box count) against log(1/side) over the given
/// sides: the box-counting estimate of the Minkowski dimension.
double box_dimension_estimate(const TargetSet& set,
                              const std::vector<double>& sides);

/// Greedy packing number: how many pairwise-disjoint radius-eps balls fit
/// with centers on net points. Diagnostic for net quality.
std::size_t packing_number(const TargetSet& set, double eps);

}  // namespace mobigg::coverage
