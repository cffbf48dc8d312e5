#include "mobigg/sausage/sausage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobigg/core/point_cells.hpp"
#include "mobigg/core/rng.hpp"
#include "mobigg/core/stats.hpp"
#include "mobigg/coverage/enlarged_set.hpp"

namespace mobigg::sausage {

namespace {

constexpr std::uint64_t kZetaTag = 0x5A05A6E0ULL;
constexpr std::uint64_t kDriftTag = 0xD21F7000ULL;
constexpr std::uint64_t kQueryTag = 0x40E52ULL;

struct PathBounds {
  double lo[4];
  double hi[4];
};

PathBounds bounds_of(const std::vector<double>& pts, std::size_t n, int d) {
  PathBounds b;
  for (int k = 0; k < d; ++k) {
    b.lo[k] = pts[k];
    b.hi[k] = pts[k];
  }
  for (std::size_t i = 1; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      b.lo[k] = std::min(b.lo[k], pts[i * d + k]);
      b.hi[k] = std::max(b.hi[k], pts[i * d + k]);
    }
  return b;
}

double min_max_volume(const std::vector<double>& pts, std::size_t n, double r) {
  double lo = pts[0], hi = pts[0];
  for (std::size_t k = 1; k < n; ++k) {
    lo = std::min(lo, pts[k]);
    hi = std::max(hi, pts[k]);
  }
  return 2.0 * r + hi - lo;
}

double hit_or_miss_volume(const std::vector<double>& pts, std::size_t n, int d,
                          double r, std::size_t samples,
                          core::Substream& query) {
  const PathBounds b = bounds_of(pts, n, d);
  double box_vol = 1.0;
  for (int k = 0; k < d; ++k) box_vol *= b.hi[k] - b.lo[k] + 2.0 * r;
  core::PointCells cells(pts.data(), n, d, r);
  std::size_t hits = 0;
  double x[4];
  for (std::size_t s = 0; s < samples; ++s) {
    for (int k = 0; k < d; ++k)
      x[k] = query.next_uniform(b.lo[k] - r, b.hi[k] + r);
    if (cells.any_within(x, r)) ++hits;
  }
  return box_vol * static_cast<double>(hits) / static_cast<double>(samples);
}

double voxel_volume(const std::vector<double>& pts, std::size_t n, int d,
                    double r, const SausageParams& params) {
  const double h = params.voxel_resolution_factor * r;
  const PathBounds b = bounds_of(pts, n, d);
  std::size_t dims[4] = {1, 1, 1, 1};
  double total = 1.0;
  for (int k = 0; k < d; ++k) {
    dims[k] = static_cast<std::size_t>(
                  std::floor((b.hi[k] - b.lo[k] + 2.0 * r) / h)) + 1;
    total *= static_cast<double>(dims[k]);
  }
  if (total > static_cast<double>(params.voxel_cell_cap))
    throw std::invalid_argument(
        "sausage voxel method: grid of " + std::to_string(total) +
        " cells exceeds the configured cap; lower t, raise the resolution "
        "factor, or use hit-or-miss");
  std::vector<std::uint8_t> marked(static_cast<std::size_t>(total), 0);
  const int reach = static_cast<int>(std::ceil(r / h));
  const double r_sq = r * r;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = &pts[i * d];
    int lo_idx[4] = {0, 0, 0, 0}, hi_idx[4] = {0, 0, 0, 0};
    for (int k = 0; k < d; ++k) {
      const int c = static_cast<int>(std::floor((p[k] - (b.lo[k] - r)) / h));
      lo_idx[k] = std::max(0, c - reach);
      hi_idx[k] = std::min(static_cast<int>(dims[k]) - 1, c + reach);
    }
    int idx[4];
    for (int k = 0; k < d; ++k) idx[k] = lo_idx[k];
    for (;;) {
      double center[4];
      for (int k = 0; k < d; ++k) center[k] = b.lo[k] - r + (idx[k] + 0.5) * h;
      if (core::euclid_sq_dist(center, p, d) <= r_sq) {
        std::size_t flat = 0;
        for (int k = d - 1; k >= 0; --k)
          flat = flat * dims[k] + static_cast<std::size_t>(idx[k]);
        if (!marked[flat]) {
          marked[flat] = 1;
          ++count;
        }
      }
      int k = 0;
      while (k < d && ++idx[k] > hi_idx[k]) {
        idx[k] = lo_idx[k];
        ++k;
      }
      if (k == d) break;
    }
  }
  double cell_vol = 1.0;
  for (int k = 0; k < d; ++k) cell_vol *= h;
  return static_cast<double>(count) * cell_vol;
}

// Relative path p_k = g(k dt) - zeta(k dt) for k = 0..steps, flat layout.
class RelativePathSampler {
 public:
  RelativePathSampler(const SausageSpec& spec, double dt, std::size_t steps,
                      std::uint64_t seed)
      : spec_(spec), dt_(dt), steps_(steps), seed_(seed) {
    if (spec.drift.kind == core::Trajectory::Kind::Deterministic) {
      spec.drift.validate(spec.d, dt, spec.t);
      g_values_.resize((steps + 1) * static_cast<std::size_t>(spec.d));
      for (std::size_t k = 0; k <= steps; ++k) {
        const core::Point g = spec.drift.path(static_cast<double>(k) * dt);
        for (int c = 0; c < spec.d; ++c)
          g_values_[k * static_cast<std::size_t>(spec.d) + c] = g[c];
      }
    }
  }

  void sample(std::size_t path_index, std::vector<double>& out) const {
    const int d = spec_.d;
    out.resize((steps_ + 1) * static_cast<std::size_t>(d));
    core::Substream zeta(seed_, kZetaTag, path_index);
    core::Substream drift(seed_, kDriftTag, path_index);
    const double scale = std::sqrt(dt_);
    double z[4] = {0, 0, 0, 0};
    double g[4] = {0, 0, 0, 0};
    for (std::size_t k = 0; k <= steps_; ++k) {
      if (k > 0) {
        for (int c = 0; c < d; ++c) z[c] += scale * zeta.next_normal();
        if (spec_.drift.kind == core::Trajectory::Kind::Brownian)
          for (int c = 0; c < d; ++c) g[c] += scale * drift.next_normal();
      }
      for (int c = 0; c < d; ++c) {
        double gc = g[c];
        if (spec_.drift.kind == core::Trajectory::Kind::Deterministic)
          gc = g_values_[k * static_cast<std::size_t>(d) + c];
        out[k * static_cast<std::size_t>(d) + c] = gc - z[c];
      }
    }
  }

 private:
  SausageSpec spec_;
  double dt_;
  std::size_t steps_;
  std::uint64_t seed_;
  std::vector<double> g_values_;
};

Method pick_method(const SausageSpec& spec, std::optional<Method> requested) {
  if (requested) {
    if (*requested == Method::ExactMinMax1D && spec.d != 1)
      throw std::invalid_argument("ExactMinMax1D requires d = 1");
    return *requested;
  }
  return spec.d == 1 ? Method::ExactMinMax1D : Method::HitOrMiss;
}

VolumeEstimate finish(const core::RunningMoments& m, Method method,
                      std::size_t paths, double dt) {
  VolumeEstimate est;
  est.mean = m.mean();
  est.std_error = m.std_error();
  est.method = method;
  est.paths = paths;
  est.dt = dt;
  return est;
}

}  // namespace

VolumeEstimate sausage_volume(const SausageSpec& spec, std::size_t paths,
                              double dt, std::uint64_t seed,
                              std::optional<Method> method,
                              const SausageParams& params) {
  if (paths < 1) throw std::invalid_argument("sausage_volume: paths >= 1");
  if (dt <= 0) throw std::invalid_argument("sausage_volume: dt > 0");
  if (spec.r <= 0 || spec.t < 0)
    throw std::invalid_argument("sausage_volume: bad spec");
  const Method m = pick_method(spec, method);
  const std::size_t steps = static_cast<std::size_t>(std::llround(spec.t / dt));

  if (steps == 0) {
    // single ball: exact
    VolumeEstimate est;
    est.mean = core::unit_ball_volume(spec.d) * std::pow(spec.r, spec.d);
    est.std_error = 0.0;
    est.method = m;
    est.paths = paths;
    est.dt = dt;
    return est;
  }

  RelativePathSampler sampler(spec, dt, steps, seed);
  core::RunningMoments moments;
  std::vector<double> pts;
  for (std::size_t i = 0; i < paths; ++i) {
    sampler.sample(i, pts);
    double vol = 0.0;
    switch (m) {
      case Method::ExactMinMax1D:
        vol = min_max_volume(pts, steps + 1, spec.r);
        break;
      case Method::HitOrMiss: {
        core::Substream query(seed, kQueryTag, i);
        vol = hit_or_miss_volume(pts, steps + 1, spec.d, spec.r,
                                 params.hit_or_miss_samples, query);
        break;
      }
      case Method::Voxel:
        vol = voxel_volume(pts, steps + 1, spec.d, spec.r, params);
        break;
    }
    moments.add(vol);
  }
  return finish(moments, m, paths, dt);
}

VolumeEstimate sausage_volume_conditional(int d, double r,
                                          const std::vector<double>& g_flat,
                                          std::size_t steps, double dt,
                                          std::size_t inner_paths,
                                          std::uint64_t seed,
                                          const SausageParams& params) {
  if (g_flat.size() != (steps + 1) * static_cast<std::size_t>(d))
    throw std::invalid_argument("sausage_volume_conditional: path size mismatch");
  if (inner_paths < 2)
    throw std::invalid_argument("sausage_volume_conditional: inner_paths >= 2");
  core::RunningMoments moments;
  std::vector<double> rel((steps + 1) * static_cast<std::size_t>(d));
  const double scale = std::sqrt(dt);
  for (std::size_t i = 0; i < inner_paths; ++i) {
    core::Substream zeta(seed, kZetaTag, i);
    double z[4] = {0, 0, 0, 0};
    for (std::size_t k = 0; k <= steps; ++k) {
      if (k > 0)
        for (int c = 0; c < d; ++c) z[c] += scale * zeta.next_normal();
      for (int c = 0; c < d; ++c)
        rel[k * d + c] = g_flat[k * d + c] - z[c];
    }
    if (d == 1) {
      moments.add(min_max_volume(rel, steps + 1, r));
    } else {
      core::Substream query(seed, kQueryTag, i);
      moments.add(hit_or_miss_volume(rel, steps + 1, d, r,
                                     params.hit_or_miss_samples, query));
    }
  }
  return finish(moments, d == 1 ? Method::ExactMinMax1D : Method::HitOrMiss,
                inner_paths, dt);
}

std::vector<VolumeEstimate> drift_comparison(
    int d, double r, double t, const std::vector<core::Trajectory>& drifts,
    std::size_t paths, double dt, std::uint64_t seed,
    const SausageParams& params) {
  if (drifts.empty()) throw std::invalid_argument("drift_comparison: no drifts");
  if (paths < 1) throw std::invalid_argument("drift_comparison: paths >= 1");
  const std::size_t steps = static_cast<std::size_t>(std::llround(t / dt));
  if (steps == 0) throw std::invalid_argument("drift_comparison: t too small");

  std::vector<core::RunningMoments> moments(drifts.size());
  const Method m = d == 1 ? Method::ExactMinMax1D : Method::HitOrMiss;

  std::vector<std::vector<double>> tabulated(drifts.size());
  for (std::size_t j = 0; j < drifts.size(); ++j)
    if (drifts[j].kind == core::Trajectory::Kind::Deterministic) {
      drifts[j].validate(d, dt, t);
      auto& tab = tabulated[j];
      tab.resize((steps + 1) * static_cast<std::size_t>(d));
      for (std::size_t k = 0; k <= steps; ++k) {
        const core::Point g = drifts[j].path(static_cast<double>(k) * dt);
        for (int c = 0; c < d; ++c)
          tab[k * static_cast<std::size_t>(d) + c] = g[c];
      }
    }

  std::vector<double> zeta((steps + 1) * static_cast<std::size_t>(d));
  std::vector<double> rel((steps + 1) * static_cast<std::size_t>(d));
  const double scale = std::sqrt(dt);
  for (std::size_t i = 0; i < paths; ++i) {
    core::Substream zs(seed, kZetaTag, i);
    for (int c = 0; c < d; ++c) zeta[c] = 0.0;
    for (std::size_t k = 1; k <= steps; ++k)
      for (int c = 0; c < d; ++c)
        zeta[k * d + c] = zeta[(k - 1) * d + c] + scale * zs.next_normal();

    for (std::size_t j = 0; j < drifts.size(); ++j) {
      const auto& drift = drifts[j];
      core::Substream ds(seed, kDriftTag ^ (j + 1), i);
      double g[4] = {0, 0, 0, 0};
      for (std::size_t k = 0; k <= steps; ++k) {
        if (k > 0 && drift.kind == core::Trajectory::Kind::Brownian)
          for (int c = 0; c < d; ++c) g[c] += scale * ds.next_normal();
        for (int c = 0; c < d; ++c) {
          double gc = g[c];
          if (drift.kind == core::Trajectory::Kind::Deterministic)
            gc = tabulated[j][k * static_cast<std::size_t>(d) + c];
          rel[k * d + c] = gc - zeta[k * d + c];
        }
      }
      if (m == Method::ExactMinMax1D) {
        moments[j].add(min_max_volume(rel, steps + 1, r));
      } else {
        core::Substream query(seed, kQueryTag, i);  // shared across drifts
        moments[j].add(hit_or_miss_volume(rel, steps + 1, d, r,
                                          params.hit_or_miss_samples, query));
      }
    }
  }

  std::vector<VolumeEstimate> out;
  out.reserve(drifts.size());
  for (const auto& mm : moments) out.push_back(finish(mm, m, paths, dt));
  return out;
}

VolumeEstimate compact_set_sweep_volume(const coverage::TargetSet& K, double r,
                                        double t, std::size_t paths, double dt,
                                        std::uint64_t seed,
                                        const SausageParams& params) {
  if (K.size() == 0)
    throw std::invalid_argument("compact_set_sweep_volume: empty K");
  if (paths < 1)
    throw std::invalid_argument("compact_set_sweep_volume: paths >= 1");
  if (K.kind != coverage::TargetKind::Point && K.epsilon > r / 10.0)
    throw std::invalid_argument(
        "compact_set_sweep_volume: net resolution must be <= r/10");
  const int d = K.dim();
  const std::size_t steps = static_cast<std::size_t>(std::llround(t / dt));
  const double h = params.voxel_resolution_factor * r;
  const coverage::EnlargedSetOracle oracle(K, r, h);
  const core::Box kbox = K.bounding_box();

  core::RunningMoments moments;
  std::vector<double> zeta((steps + 1) * static_cast<std::size_t>(d));
  const double scale = std::sqrt(dt);
  for (std::size_t i = 0; i < paths; ++i) {
    core::Substream zs(seed, kZetaTag, i);
    for (int c = 0; c < d; ++c) zeta[c] = 0.0;
    for (std::size_t k = 1; k <= steps; ++k)
      for (int c = 0; c < d; ++c)
        zeta[k * d + c] = zeta[(k - 1) * d + c] + scale * zs.next_normal();

    // swept-body bounding box: bbox(K^r) shifted by the path's range
    double lo[4], hi[4];
    for (int c = 0; c < d; ++c) {
      double zlo = 0.0, zhi = 0.0;
      for (std::size_t k = 0; k <= steps; ++k) {
        zlo = std::min(zlo, zeta[k * d + c]);
        zhi = std::max(zhi, zeta[k * d + c]);
      }
      lo[c] = kbox.lo[c] - r - zhi;
      hi[c] = kbox.hi[c] + r - zlo;
    }
    double box_vol = 1.0;
    for (int c = 0; c < d; ++c) box_vol *= hi[c] - lo[c];

    core::Substream query(seed, kQueryTag, i);
    std::size_t hits = 0;
    double x[4], y[4];
    for (std::size_t s = 0; s < params.hit_or_miss_samples; ++s) {
      for (int c = 0; c < d; ++c) x[c] = query.next_uniform(lo[c], hi[c]);
      bool hit = false;
      for (std::size_t k = 0; k <= steps && !hit; ++k) {
        for (int c = 0; c < d; ++c) y[c] = x[c] + zeta[k * d + c];
        hit = oracle.contains(y);
      }
      if (hit) ++hits;
    }
    moments.add(box_vol * static_cast<double>(hits) /
                static_cast<double>(params.hit_or_miss_samples));
  }
  return finish(moments, Method::HitOrMiss, paths, dt);
}

RefinementReport sausage_dt_refinement(const SausageSpec& spec,
                                       std::size_t paths, double dt, int factor,
                                       std::uint64_t seed,
                                       const SausageParams& params) {
  if (factor < 2)
    throw std::invalid_argument("sausage_dt_refinement: factor >= 2");
  const double fine_dt = dt / factor;
  const std::size_t fine_steps =
      static_cast<std::size_t>(std::llround(spec.t / fine_dt));
  if (fine_steps == 0)
    throw std::invalid_argument("sausage_dt_refinement: t too small");

  RelativePathSampler sampler(spec, fine_dt, fine_steps, seed);
  core::RunningMoments coarse_m, fine_m, diff_m;
  std::vector<double> pts;
  std::vector<double> coarse_pts;
  const int d = spec.d;
  const Method m = d == 1 ? Method::ExactMinMax1D : Method::HitOrMiss;
  for (std::size_t i = 0; i < paths; ++i) {
    sampler.sample(i, pts);
    double vol_fine = 0.0, vol_coarse = 0.0;
    if (d == 1) {
      double flo = pts[0], fhi = pts[0], clo = pts[0], chi = pts[0];
      for (std::size_t k = 1; k <= fine_steps; ++k) {
        flo = std::min(flo, pts[k]);
        fhi = std::max(fhi, pts[k]);
        if (k % static_cast<std::size_t>(factor) == 0) {
          clo = std::min(clo, pts[k]);
          chi = std::max(chi, pts[k]);
        }
      }
      vol_fine = 2.0 * spec.r + fhi - flo;
      vol_coarse = 2.0 * spec.r + chi - clo;
    } else {
      coarse_pts.clear();
      for (std::size_t k = 0; k <= fine_steps;
           k += static_cast<std::size_t>(factor))
        for (int c = 0; c < d; ++c) coarse_pts.push_back(pts[k * d + c]);
      core::Substream qf(seed, kQueryTag, i);
      core::Substream qc(seed, kQueryTag, i);
      vol_fine = hit_or_miss_volume(pts, fine_steps + 1, d, spec.r,
                                    params.hit_or_miss_samples, qf);
      vol_coarse = hit_or_miss_volume(coarse_pts, coarse_pts.size() / d, d,
                                      spec.r, params.hit_or_miss_samples, qc);
    }
    coarse_m.add(vol_coarse);
    fine_m.add(vol_fine);
    diff_m.add(vol_fine - vol_coarse);
  }

  RefinementReport rep;
  rep.coarse = finish(coarse_m, m, paths, dt);
  rep.fine = finish(fine_m, m, paths, fine_dt);
  rep.diff_mean = diff_m.mean();
  rep.diff_std_error = diff_m.std_error();
  return rep;
}

}  // namespace mobigg::sausage
