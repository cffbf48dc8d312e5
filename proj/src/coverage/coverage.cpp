#include "mobigg/coverage/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mobigg/core/cloud.hpp"
#include "mobigg/core/parallel.hpp"
#include "mobigg/core/rng.hpp"

namespace mobigg::coverage {

namespace {

constexpr std::uint64_t kTrialTag = 0xC04E2ULL;

// Uncovered net points on a cell grid (cell side = cover radius), supporting
// conservative distance lower bounds and ball removals.
class CoverTracker {
 public:
  CoverTracker(const TargetSet& set, double cover_radius)
      : d_(set.dim()), radius_(cover_radius) {
    n_ = set.size();
    pts_.assign(set.points.data(), set.points.data() + set.points.size());
    alive_.assign(n_, 1);
    alive_count_ = n_;
    const core::Box bbox = set.bounding_box();
    for (int k = 0; k < d_; ++k) {
      lo_[k] = bbox.lo[k];
      dims_[k] = static_cast<std::size_t>(
                     std::floor((bbox.hi[k] - bbox.lo[k]) / radius_)) + 1;
    }
    std::size_t total = 1;
    for (int k = 0; k < d_; ++k) total *= dims_[k];
    cell_points_.resize(total);
    cell_live_.assign(total, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t c = cell_of(&pts_[i * d_]);
      cell_points_[c].push_back(static_cast<std::uint32_t>(i));
      ++cell_live_[c];
    }
    recompute_bbox();
  }

  std::size_t uncovered_count() const { return alive_count_; }

  /// Lower bound on the distance from x to the nearest uncovered point.
  double distance_lb(const double* x) const {
    if (alive_count_ == 0) return std::numeric_limits<double>::infinity();
    const double box_dist = bbox_.distance(x);
    const double cap = static_cast<double>(kMaxRing - 1) * radius_;
    if (box_dist >= cap) return box_dist;

    int base[4] = {0, 0, 0, 0};
    for (int k = 0; k < d_; ++k)
      base[k] = static_cast<int>(std::floor((x[k] - lo_[k]) / radius_));
    for (int ring = 0; ring < kMaxRing; ++ring) {
      if (ring_has_live(base, ring))
        return std::max(box_dist, std::max(0, ring - 1) * radius_);
    }
    return std::max(box_dist, cap);
  }

  /// Mark every uncovered point within the cover radius of x as covered.
  std::size_t cover_near(const double* x) {
    const double r_sq = radius_ * radius_;
    std::size_t removed = 0;
    int base[4] = {0, 0, 0, 0};
    for (int k = 0; k < d_; ++k)
      base[k] = static_cast<int>(std::floor((x[k] - lo_[k]) / radius_));
    int idx[4];
    int lo_idx[4], hi_idx[4];
    for (int k = 0; k < d_; ++k) {
      lo_idx[k] = std::max(0, base[k] - 1);
      hi_idx[k] = std::min(static_cast<int>(dims_[k]) - 1, base[k] + 1);
      idx[k] = lo_idx[k];
      if (lo_idx[k] > hi_idx[k]) return 0;
    }
    for (;;) {
      const std::size_t c = flat_index(idx);
      if (cell_live_[c] > 0) {
        for (const std::uint32_t i : cell_points_[c]) {
          if (!alive_[i]) continue;
          if (core::euclid_sq_dist(x, &pts_[static_cast<std::size_t>(i) * d_], d_) <=
              r_sq) {
            alive_[i] = 0;
            --cell_live_[c];
            --alive_count_;
            ++removed;
          }
        }
      }
      int k = 0;
      while (k < d_ && ++idx[k] > hi_idx[k]) {
        idx[k] = lo_idx[k];
        ++k;
      }
      if (k == d_) break;
    }
    if (removed > 0 && alive_count_ * 2 < last_bbox_count_) recompute_bbox();
    return removed;
  }

 private:
  static constexpr int kMaxRing = 8;

  std::size_t cell_of(const double* p) const {
    int idx[4];
    for (int k = 0; k < d_; ++k) {
      idx[k] = static_cast<int>(std::floor((p[k] - lo_[k]) / radius_));
      idx[k] = std::clamp(idx[k], 0, static_cast<int>(dims_[k]) - 1);
    }
    return flat_index(idx);
  }

  std::size_t flat_index(const int* idx) const {
    std::size_t flat = 0;
    for (int k = d_ - 1; k >= 0; --k)
      flat = flat * dims_[k] + static_cast<std::size_t>(idx[k]);
    return flat;
  }

  // any live cell on the Chebyshev ring at the given radius around base?
  bool ring_has_live(const int* base, int ring) const {
    int lo_idx[4], hi_idx[4], idx[4];
    for (int k = 0; k < d_; ++k) {
      lo_idx[k] = std::max(0, base[k] - ring);
      hi_idx[k] = std::min(static_cast<int>(dims_[k]) - 1, base[k] + ring);
      if (lo_idx[k] > hi_idx[k]) return false;
      idx[k] = lo_idx[k];
    }
    for (;;) {
      bool on_ring = false;
      for (int k = 0; k < d_; ++k)
        if (idx[k] == base[k] - ring || idx[k] == base[k] + ring) on_ring = true;
      if (on_ring || ring == 0) {
        if (cell_live_[flat_index(idx)] > 0) return true;
      }
      int k = 0;
      while (k < d_ && ++idx[k] > hi_idx[k]) {
        idx[k] = lo_idx[k];
        ++k;
      }
      if (k == d_) break;
    }
    return false;
  }

  void recompute_bbox() {
    core::Point blo = core::Point::Constant(d_, std::numeric_limits<double>::max());
    core::Point bhi = core::Point::Constant(d_, std::numeric_limits<double>::lowest());
    for (std::size_t i = 0; i < n_; ++i) {
      if (!alive_[i]) continue;
      for (int k = 0; k < d_; ++k) {
        blo[k] = std::min(blo[k], pts_[i * d_ + k]);
        bhi[k] = std::max(bhi[k], pts_[i * d_ + k]);
      }
    }
    if (alive_count_ > 0) bbox_ = core::Box(std::move(blo), std::move(bhi));
    last_bbox_count_ = alive_count_;
  }

  int d_;
  double radius_;
  std::size_t n_ = 0;
  std::vector<double> pts_;
  std::vector<std::uint8_t> alive_;
  std::size_t alive_count_ = 0;
  double lo_[4];
  std::size_t dims_[4] = {1, 1, 1, 1};
  std::vector<std::vector<std::uint32_t>> cell_points_;
  std::vector<std::uint32_t> cell_live_;
  core::Box bbox_;
  std::size_t last_bbox_count_ = 0;
};

}  // namespace

CoverSample estimate_cover_time(const TargetSet& set,
                                const core::SimConfig& config,
                                std::size_t trials, unsigned threads,
                                bool exact_paths) {
  config.validate();
  if (config.domain.kind != core::DomainKind::BoxedPlane)
    throw std::invalid_argument("estimate_cover_time: BoxedPlane domains only");
  if (set.dim() != config.d)
    throw std::invalid_argument("estimate_cover_time: dim mismatch");
  if (set.epsilon >= config.r)
    throw std::invalid_argument("estimate_cover_time: need epsilon < r");
  const double needed = core::required_buffer(config.r, config.horizon);
  if (config.domain.buffer < needed)
    throw std::invalid_argument(
        "estimate_cover_time: buffer below the core rule for this horizon");

  const double cover_radius = config.r - set.epsilon;
  const std::size_t steps = config.grid_steps();
  const core::Box region =
      set.bounding_box().inflated(config.r + config.domain.buffer);

  CoverSample sample;
  sample.trials = trials;
  std::vector<double> covered_times(trials, -1.0);
  core::parallel_for(trials, threads, [&](std::size_t trial) {
    CoverTracker tracker(set, cover_radius);
    double covered_at = -1.0;

    core::CloudConfig cloud;
    cloud.d = config.d;
    cloud.lambda = config.lambda;
    cloud.region = region;
    cloud.dt = config.dt;
    cloud.steps = steps;
    cloud.deliver_radius =
        exact_paths ? std::numeric_limits<double>::infinity() : cover_radius;
    cloud.seed = core::substream_key(config.seed, trial, kTrialTag);

    core::run_brownian_cloud(
        cloud,
        [&](const double* x) { return tracker.distance_lb(x); },
        [&](std::uint32_t, const double* x) { tracker.cover_near(x); },
        [&](std::size_t step) {
          if (tracker.uncovered_count() == 0) {
            covered_at = static_cast<double>(step) * config.dt;
            return false;
          }
          return true;
        });

    covered_times[trial] = covered_at;
  });
  core::RunningMoments moments;
  for (const double t : covered_times) {
    if (t >= 0) {
      sample.times.push_back(t);
      moments.add(t);
    } else {
      ++sample.censored;
    }
  }
  sample.per_trial = std::move(covered_times);
  sample.mean = moments.mean();
  sample.std_error = moments.std_error();
  sample.unreliable = sample.censored * 2 > trials;
  return sample;
}

double coverage_rate_function(int d, double R) {
  const double lr = std::log(R);
  if (d == 1) return lr * lr;
  if (d == 2) return lr * std::log(std::max(lr, 1.0 + 1e-9));
  return lr;
}

ScalingStudy coverage_scaling_study(TargetKind kind, int d,
                                    const std::vector<double>& R_list,
                                    const core::SimConfig& config,
                                    double epsilon, std::size_t trials,
                                    unsigned threads) {
  if (R_list.size() < 4)
    throw std::invalid_argument("coverage_scaling_study: need >= 4 scales");
  for (std::size_t i = 2; i < R_list.size(); ++i) {
    const double q0 = R_list[1] / R_list[0];
    if (std::abs(R_list[i] / R_list[i - 1] - q0) > 1e-6 * q0)
      throw std::invalid_argument(
          "coverage_scaling_study: R_list must be geometric");
  }

  ScalingStudy study;
  std::vector<double> xs, ys;
  for (const double R : R_list) {
    const TargetSet set = build_target(kind, d, R, epsilon);
    const CoverSample s = estimate_cover_time(set, config, trials, threads);
    ScalingRow row;
    row.R = R;
    row.mean = s.mean;
    row.std_error = s.std_error;
    row.trials = trials;
    row.censored = s.censored;
    study.rows.push_back(row);
    xs.push_back(coverage_rate_function(d, R));
    ys.push_back(s.mean);
    if (&R == &R_list.back() && !s.times.empty()) {
      core::RunningMoments m;
      for (const double t : s.times) m.add(t);
      study.cv_largest = m.mean() > 0 ? m.std_dev() / m.mean() : 0.0;
    }
  }
  study.fit = core::linear_fit(xs, ys);

  // matched-scale ratio against the complementary shape at the largest R
  const double R_max = R_list.back();
  const TargetKind other =
      kind == TargetKind::Cube ? TargetKind::Segment : TargetKind::Cube;
  const TargetSet other_set = build_target(other, d, R_max, epsilon);
  const CoverSample other_sample =
      estimate_cover_time(other_set, config, trials, threads);
  const ScalingRow& last = study.rows.back();
  const double seg_mean =
      kind == TargetKind::Cube ? other_sample.mean : last.mean;
  const double seg_se =
      kind == TargetKind::Cube ? other_sample.std_error : last.std_error;
  const double cube_mean =
      kind == TargetKind::Cube ? last.mean : other_sample.mean;
  const double cube_se =
      kind == TargetKind::Cube ? last.std_error : other_sample.std_error;
  if (cube_mean > 0) {
    study.seg_cube_ratio = seg_mean / cube_mean;
    study.seg_cube_ratio_se =
        study.seg_cube_ratio *
        std::sqrt(seg_se * seg_se / (seg_mean * seg_mean) +
                  cube_se * cube_se / (cube_mean * cube_mean));
  }
  return study;
}

}  // namespace mobigg::coverage
