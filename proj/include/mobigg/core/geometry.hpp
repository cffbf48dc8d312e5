#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace mobigg::core {

// Node positions are rows of an N x d matrix; row-major so a node's
// coordinates are contiguous.
using PointMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Point = Eigen::VectorXd;

/// Axis-aligned box in R^d.
struct Box {
  Point lo;
  Point hi;

  Box() = default;
  Box(Point lo_, Point hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) throw std::invalid_argument("Box: dim mismatch");
  }

  /// Cube [-side/2, side/2]^d.
  static Box centered_cube(int d, double side) {
    Point l = Point::Constant(d, -side / 2.0);
    Point h = Point::Constant(d, side / 2.0);
    return Box(std::move(l), std::move(h));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }

  bool contains(const Eigen::Ref<const Point>& p, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    return true;
  }

  Box inflated(double margin) const {
    Box b = *this;
    b.lo.array() -= margin;
    b.hi.array() += margin;
    return b;
  }

  /// Euclidean distance from p to the box (0 if inside).
  double distance(const double* p) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) {
      double g = 0.0;
      if (p[i] < lo[i]) g = lo[i] - p[i];
      else if (p[i] > hi[i]) g = p[i] - hi[i];
      s += g * g;
    }
    return std::sqrt(s);
  }

  Box union_with(const Box& other) const {
    Box b = *this;
    b.lo = b.lo.cwiseMin(other.lo);
    b.hi = b.hi.cwiseMax(other.hi);
    return b;
  }
};

inline double torus_coord_delta(double a, double b, double side) {
  double diff = std::abs(a - b);
  diff = std::fmod(diff, side);
  return std::min(diff, side - diff);
}

inline double torus_sq_dist(const double* a, const double* b, int d,
                            double side) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = torus_coord_delta(a[i], b[i], side);
    s += diff * diff;
  }
  return s;
}

inline double euclid_sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

/// Wrap a coordinate into [0, side).
inline double torus_wrap(double x, double side) {
  double w = std::fmod(x, side);
  if (w < 0) w += side;
  return w;
}

/// Unit-ball volume v_d for d <= 4.
inline double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return M_PI;
    case 3: return 4.0 * M_PI / 3.0;
    case 4: return M_PI * M_PI / 2.0;
    default: throw std::invalid_argument("unit_ball_volume: d must be 1..4");
  }
}

/// Surface area of the unit sphere S^{d-1} for d <= 4.
inline double unit_sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    case 4: return 2.0 * M_PI * M_PI;
    default: throw std::invalid_argument("unit_sphere_area: d must be 1..4");
  }
}

}  // namespace mobigg::core
