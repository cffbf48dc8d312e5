#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mobigg/core/domain.hpp"
#include "mobigg/core/tail.hpp"
#include "mobigg/coverage/target_set.hpp"

namespace mobigg::detection {

using core::TailCurve;

struct DetectionTrial {
  std::optional<double> detected_at;  // grid time
  bool censored = false;              // horizon reached undetected
  std::uint64_t trial_index = 0;
};

TailCurve tail_from_times(const std::vector<DetectionTrial>& trials, double dt,
                          double horizon);

/// Direct simulation of T_det: nodes sampled on the realized target path's
/// bounding box inflated by r plus the domain buffer, co-evolved on the dt
/// grid; detection at the first grid time with node-target distance <= r.
/// Refuses when config.domain.buffer is below the core buffer rule.
std::vector<DetectionTrial> detection_trials(const core::SimConfig& config,
                                             const core::Trajectory& target,
                                             std::size_t trials,
                                             unsigned threads = 1);

TailCurve simulate_detection(const core::SimConfig& config,
                             const core::Trajectory& target,
                             std::size_t trials, unsigned threads = 1);

struct CrosscheckReport {
  double direct_survival = 0.0;
  double direct_std_error = 0.0;
  double formula_survival = 0.0;
  double formula_std_error = 0.0;
  double z = 0.0;
  bool pass = false;  // |direct - formula| <= 3 combined sigma
};

/// Direct tail vs exp(-lambda E vol W_g(t)) with the sausage module as the
/// independent volume oracle. Brownian targets use the conditional-volume
/// estimator averaged over realized target paths (with a lognormal correction
/// for the inner Monte Carlo noise).
CrosscheckReport detection_formula_crosscheck(const core::SimConfig& config,
                                              const core::Trajectory& target,
                                              double t, std::size_t trials,
                                              std::size_t paths);

/// Tail of T_det(K): first grid time any node lies in K^r.
TailCurve compact_detection_tail(const coverage::TargetSet& K,
                                 const core::SimConfig& config,
                                 std::size_t trials, unsigned threads = 1);

std::vector<DetectionTrial> compact_detection_trials(
    const coverage::TargetSet& K, const core::SimConfig& config,
    std::size_t trials, unsigned threads = 1);

struct StayPutReport {
  TailCurve stationary;
  TailCurve brownian;
  TailCurve linear;
  // survival(stationary) - survival(other) with paired standard errors
  std::vector<double> eval_times;
  std::vector<double> margin_brownian, margin_brownian_se;
  std::vector<double> margin_linear, margin_linear_se;
  bool asserted = false;  // d = 1 only
  bool pass = true;       // margins >= -3 se at every eval time
};

/// Stationary vs Brownian vs unit linear drift targets under shared node
/// randomness. Asserts the stay-put advantage in d = 1; reports only in
/// higher dimensions.
StayPutReport stay_put_comparison(const core::SimConfig& config,
                                  const std::vector<double>& eval_times,
                                  std::size_t trials);

}  // namespace mobigg::detection
