#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mobigg/core/domain.hpp"
#include "mobigg/coverage/target_set.hpp"

namespace mobigg::sausage {

enum class Method { ExactMinMax1D, HitOrMiss, Voxel };

/// E vol of the union of radius-r balls along the relative path g - zeta on
/// the dt grid up to time t.
struct SausageSpec {
  int d = 1;
  double r = 1.0;
  double t = 1.0;
  core::Trajectory drift;  // g
};

struct VolumeEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  Method method = Method::ExactMinMax1D;
  std::size_t paths = 0;
  double dt = 0.0;
};

struct SausageParams {
  std::size_t hit_or_miss_samples = 1024;
  double voxel_resolution_factor = 0.1;      // voxel side = factor * r
  std::size_t voxel_cell_cap = 100'000'000;  // refuse larger grids
};

/// Monte Carlo estimate of E vol(W_g(t)) at grid resolution dt.
/// d = 1 uses vol = 2r + max - min of the relative path; d >= 2 defaults to
/// hit-or-miss over the path bounding box inflated by r.
VolumeEstimate sausage_volume(const SausageSpec& spec, std::size_t paths,
                              double dt, std::uint64_t seed,
                              std::optional<Method> method = std::nullopt,
                              const SausageParams& params = {});

/// Estimates for several drifts under shared zeta paths (and shared
/// hit-or-miss query points), so drift comparisons have low variance.
std::vector<VolumeEstimate> drift_comparison(
    int d, double r, double t, const std::vector<core::Trajectory>& drifts,
    std::size_t paths, double dt, std::uint64_t seed,
    const SausageParams& params = {});

/// Expected swept volume of K^r along one Brownian path:
/// E vol(union over grid s <= t of (K^r - zeta(s))), K given by its net.
VolumeEstimate compact_set_sweep_volume(const coverage::TargetSet& K, double r,
                                        double t, std::size_t paths, double dt,
                                        std::uint64_t seed,
                                        const SausageParams& params = {});

/// E[vol W_g(t) | g] for one realized target path (flat layout, steps+1
/// grid points): the inner estimator behind the moving-target identity
/// P[T_det > t] = E[exp(-lambda E[vol W_g(t) | g])].
VolumeEstimate sausage_volume_conditional(int d, double r,
                                          const std::vector<double>& g_flat,
                                          std::size_t steps, double dt,
                                          std::size_t inner_paths,
                                          std::uint64_t seed,
                                          const SausageParams& params = {});

struct RefinementReport {
  VolumeEstimate coarse;
  VolumeEstimate fine;
  double diff_mean = 0.0;       // fine - coarse, pathwise on nested grids
  double diff_std_error = 0.0;
};

/// Same underlying paths sampled at dt and dt/factor; the coarse grid is a
/// subset of the fine one, so the difference isolates discretization bias.
RefinementReport sausage_dt_refinement(const SausageSpec& spec,
                                       std::size_t paths, double dt,
                                       int factor, std::uint64_t seed,
                                       const SausageParams& params = {});

}  // namespace mobigg::sausage
