#pragma once

#include <cstdint>
#include <vector>

#include "mobigg/core/domain.hpp"
#include "mobigg/core/stats.hpp"
#include "mobigg/coverage/target_set.hpp"

namespace mobigg::coverage {

struct CoverSample {
  std::vector<double> per_trial;  // T_cov per trial; -1 when censored
  std::vector<double> times;      // uncensored T_cov values (grid times)
  std::size_t trials = 0;
  std::size_t censored = 0;
  double mean = 0.0;        // over uncensored trials
  double std_error = 0.0;
  bool unreliable = false;  // censored in more than half the trials
};

/// T_cov of the net under the conservative rule: a net point counts covered
/// once some node has been within r - epsilon of it at a grid time (which
/// implies true coverage of the point's epsilon-ball). Point targets carry
/// epsilon = 0, so their cover time is exactly the stationary detection time.
/// Refuses when config.domain.buffer is below the core rule for the horizon.
///
/// exact_paths forces every node to step at every grid time, so runs with
/// the same seed share node paths exactly (used by pathwise coupling tests);
/// the default lets far nodes take exact block jumps instead.
CoverSample estimate_cover_time(const TargetSet& set,
                                const core::SimConfig& config,
                                std::size_t trials, unsigned threads = 1,
                                bool exact_paths = false);

struct ScalingRow {
  double R = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::size_t censored = 0;
};

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  core::LinearFit fit;  // mean T_cov against the d-appropriate rate function
  double seg_cube_ratio = 0.0;     // segment / cube mean at the largest R
  double seg_cube_ratio_se = 0.0;
  double cv_largest = 0.0;         // coefficient of variation at largest R
};

/// Rate function the growth law is regressed against:
/// (log R)^2 for d=1, log R log log R for d=2, log R for d>=3.
double coverage_rate_function(int d, double R);

/// Mean cover times over a geometric list of scales R (>= 4 values), with
/// regression diagnostics and the segment-to-cube ratio at the largest R.
/// Asymptotic constants are reported, never asserted.
ScalingStudy coverage_scaling_study(TargetKind kind, int d,
                                    const std::vector<double>& R_list,
                                    const core::SimConfig& config,
                                    double epsilon, std::size_t trials,
                                    unsigned threads = 1);

}  // namespace mobigg::coverage
