#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mobigg/core/stats.hpp"

namespace mobigg::core {

/// Empirical survival curve P[T > t] on a uniform time grid. Censored trials
/// (no event by the horizon) contribute survival mass at every grid time, so
/// no censoring correction is needed for t <= horizon.
struct TailCurve {
  std::vector<double> times;
  std::vector<double> survival;   // non-increasing, in [0, 1]
  std::vector<double> std_error;  // binomial
  std::size_t trials = 0;

  double grid_dt() const { return times.size() > 1 ? times[1] - times[0] : 1.0; }

  std::size_t index_of(double t) const {
    const auto k = static_cast<std::size_t>(std::llround(t / grid_dt()));
    if (k >= times.size())
      throw std::invalid_argument("TailCurve: time beyond horizon");
    return k;
  }

  double at(double t) const { return survival[index_of(t)]; }
  double std_error_at(double t) const { return std_error[index_of(t)]; }
};

/// Trial-weighted pool of survival curves on identical grids.
inline TailCurve merge_tail_curves(const std::vector<TailCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("merge_tail_curves: empty");
  TailCurve out = curves.front();
  out.trials = 0;
  std::fill(out.survival.begin(), out.survival.end(), 0.0);
  for (const auto& c : curves) {
    if (c.times.size() != out.times.size())
      throw std::invalid_argument("merge_tail_curves: grid mismatch");
    for (std::size_t k = 0; k < out.survival.size(); ++k)
      out.survival[k] += c.survival[k] * static_cast<double>(c.trials);
    out.trials += c.trials;
  }
  for (std::size_t k = 0; k < out.survival.size(); ++k) {
    out.survival[k] /= static_cast<double>(out.trials);
    out.std_error[k] = binomial_std_error(out.survival[k], out.trials);
  }
  return out;
}

/// Build a tail curve from per-trial event times; an event time < 0 means
/// censored (no event by the horizon).
inline TailCurve tail_from_event_times(const std::vector<double>& event_times,
                                       double dt, double horizon) {
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  TailCurve curve;
  curve.trials = event_times.size();
  curve.times.resize(steps + 1);
  std::vector<std::size_t> events_at(steps + 1, 0);
  for (const double t : event_times) {
    if (t < 0) continue;
    const auto k = static_cast<std::size_t>(std::llround(t / dt));
    if (k <= steps) ++events_at[k];
  }
  curve.survival.resize(steps + 1);
  curve.std_error.resize(steps + 1);
  const double n = static_cast<double>(event_times.size());
  std::size_t cum = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    curve.times[k] = static_cast<double>(k) * dt;
    cum += events_at[k];
    const double surv = n > 0 ? (n - static_cast<double>(cum)) / n : 1.0;
    curve.survival[k] = surv;
    curve.std_error[k] = binomial_std_error(surv, event_times.size());
  }
  return curve;
}

}  // namespace mobigg::core
