#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mobigg/core/geometry.hpp"

namespace mobigg::core {

/// Hash-grid over a flat point array (x0 y0 z0 x1 y1 ...) with cell side equal
/// to the query radius, so "any point within dist" scans at most 3^d cells.
class PointCells {
 public:
  PointCells(const double* pts, std::size_t n, int d, double cell)
      : pts_(pts), d_(d), cell_(cell) {
    cells_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      int c[4] = {0, 0, 0, 0};
      for (int k = 0; k < d_; ++k)
        c[k] = static_cast<int>(std::floor(pts_[i * d_ + k] / cell_));
      cells_[pack(c, d_)].push_back(static_cast<std::uint32_t>(i));
    }
  }

  double cell_side() const { return cell_; }

  /// True iff some stored point lies within dist of x. Requires dist <= cell
  /// side; the center cell is scanned first for early exits.
  bool any_within(const double* x, double dist) const {
    const double dist_sq = dist * dist;
    int base[4] = {0, 0, 0, 0};
    for (int k = 0; k < d_; ++k)
      base[k] = static_cast<int>(std::floor(x[k] / cell_));
    if (cell_hit(base, x, dist_sq)) return true;
    int offsets = 1;
    for (int k = 0; k < d_; ++k) offsets *= 3;
    for (int o = 0; o < offsets; ++o) {
      int c[4] = {0, 0, 0, 0};
      int rem = o;
      bool center = true;
      for (int k = 0; k < d_; ++k) {
        const int off = (rem % 3) - 1;
        rem /= 3;
        c[k] = base[k] + off;
        center = center && off == 0;
      }
      if (center) continue;
      if (cell_hit(c, x, dist_sq)) return true;
    }
    return false;
  }

 private:
  static std::uint64_t pack(const int* c, int d) {
    std::uint64_t key = 0;
    for (int k = 0; k < d; ++k)
      key = (key << 16) | static_cast<std::uint16_t>(c[k] + (1 << 15));
    return key;
  }

  bool cell_hit(const int* c, const double* x, double dist_sq) const {
    const auto it = cells_.find(pack(c, d_));
    if (it == cells_.end()) return false;
    for (const std::uint32_t i : it->second)
      if (euclid_sq_dist(x, &pts_[static_cast<std::size_t>(i) * d_], d_) <= dist_sq)
        return true;
    return false;
  }

  const double* pts_;
  int d_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace mobigg::core
