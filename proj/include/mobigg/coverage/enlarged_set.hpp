#pragma once

#include <memory>
#include <vector>

#include "mobigg/core/point_cells.hpp"
#include "mobigg/coverage/target_set.hpp"

namespace mobigg::coverage {

/// Membership test for K^r, the r-enlargement of a net-discretized set.
/// A three-state voxel grid (surely in / surely out / boundary) answers most
/// queries in O(1); boundary voxels fall back to an exact distance check
/// against the net.
class EnlargedSetOracle {
 public:
  EnlargedSetOracle(const TargetSet& K, double r, double voxel_side);

  bool contains(const double* x) const;
  int dim() const { return d_; }
  double radius() const { return r_; }
  core::Box enlarged_bounding_box() const;

 private:
  static constexpr std::uint8_t kIn = 0, kOut = 1, kBoundary = 2;

  int d_;
  double r_;
  double h_;
  std::vector<double> net_;
  std::size_t n_net_ = 0;
  std::unique_ptr<core::PointCells> cells_;
  double net_lo_[4];
  double net_hi_[4];
  double lo_[4];
  std::size_t dims_[4] = {1, 1, 1, 1};
  std::vector<std::uint8_t> state_;
};

}  // namespace mobigg::coverage
