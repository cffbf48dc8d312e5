#include "mobigg/coverage/enlarged_set.hpp"

#include <cmath>
#include <stdexcept>

namespace mobigg::coverage {

EnlargedSetOracle::EnlargedSetOracle(const TargetSet& K, double r,
                                     double voxel_side)
    : d_(K.dim()), r_(r), h_(voxel_side) {
  if (K.size() == 0) throw std::invalid_argument("EnlargedSetOracle: empty net");
  if (r <= 0 || voxel_side <= 0)
    throw std::invalid_argument("EnlargedSetOracle: bad parameters");
  net_.assign(K.points.data(), K.points.data() + K.points.size());
  n_net_ = K.size();
  cells_ = std::make_unique<core::PointCells>(net_.data(), n_net_, d_,
                                              r + voxel_side);
  const core::Box bbox = K.bounding_box();
  double total = 1.0;
  for (int k = 0; k < d_; ++k) {
    net_lo_[k] = bbox.lo[k];
    net_hi_[k] = bbox.hi[k];
    lo_[k] = bbox.lo[k] - r - 2.0 * h_;
    dims_[k] = static_cast<std::size_t>(std::floor(
                   (bbox.hi[k] - bbox.lo[k] + 2.0 * (r + 2.0 * h_)) / h_)) + 1;
    total *= static_cast<double>(dims_[k]);
  }
  if (total > 2e8)
    throw std::invalid_argument("EnlargedSetOracle: occupancy grid too large");

  state_.resize(static_cast<std::size_t>(total));
  const double margin = 0.5 * h_ * std::sqrt(static_cast<double>(d_));
  std::size_t idx[4] = {0, 0, 0, 0};
  for (std::size_t flat = 0; flat < state_.size(); ++flat) {
    double center[4];
    for (int k = 0; k < d_; ++k) center[k] = lo_[k] + (idx[k] + 0.5) * h_;
    if (r - margin > 0 && cells_->any_within(center, r - margin))
      state_[flat] = kIn;
    else if (!cells_->any_within(center, r + margin))
      state_[flat] = kOut;
    else
      state_[flat] = kBoundary;
    int k = 0;
    while (k < d_ && ++idx[k] >= dims_[k]) {
      idx[k] = 0;
      ++k;
    }
  }
}

bool EnlargedSetOracle::contains(const double* x) const {
  std::size_t flat = 0;
  for (int k = d_ - 1; k >= 0; --k) {
    const double rel = (x[k] - lo_[k]) / h_;
    if (rel < 0) return false;
    const auto i = static_cast<std::size_t>(rel);
    if (i >= dims_[k]) return false;
    flat = flat * dims_[k] + i;
  }
  switch (state_[flat]) {
    case kIn: return true;
    case kOut: return false;
    default: return cells_->any_within(x, r_);
  }
}

core::Box EnlargedSetOracle::enlarged_bounding_box() const {
  core::Point lo(d_), hi(d_);
  for (int k = 0; k < d_; ++k) {
    lo[k] = net_lo_[k] - r_;
    hi[k] = net_hi_[k] + r_;
  }
  return core::Box(std::move(lo), std::move(hi));
}

}  // namespace mobigg::coverage
