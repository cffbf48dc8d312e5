#include "mobigg/detection/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobigg/core/parallel.hpp"
#include "mobigg/core/rng.hpp"
#include "mobigg/core/stats.hpp"
#include "mobigg/coverage/enlarged_set.hpp"
#include "mobigg/sausage/sausage.hpp"

namespace mobigg::detection {

namespace {

constexpr std::uint64_t kTrialTag = 0x7121A1ULL;
constexpr std::uint64_t kTargetTag = 0x7A96E7ULL;
constexpr std::uint64_t kCountTag = 0xC0117ULL;
constexpr std::uint64_t kNodeTag = 0x90DE5ULL;

void check_buffer(const core::SimConfig& config) {
  if (config.domain.kind != core::DomainKind::BoxedPlane)
    throw std::invalid_argument("detection: BoxedPlane domains only");
  const double needed = core::required_buffer(config.r, config.horizon);
  if (config.domain.buffer < needed)
    throw std::invalid_argument(
        "detection: buffer " + std::to_string(config.domain.buffer) +
        " below the core rule " + std::to_string(needed) +
        " for this horizon; detection tails would be biased");
}

// Realize a target path on the grid (steps+1 points, flat layout).
void realize_target(const core::Trajectory& target, int d, double dt,
                    std::size_t steps, std::uint64_t trial_seed,
                    const std::vector<double>* tabulated,
                    std::vector<double>& out) {
  out.assign((steps + 1) * static_cast<std::size_t>(d), 0.0);
  switch (target.kind) {
    case core::Trajectory::Kind::Stationary:
      return;
    case core::Trajectory::Kind::Deterministic:
      out = *tabulated;
      return;
    case core::Trajectory::Kind::Brownian: {
      core::Substream s(trial_seed, kTargetTag, 0);
      const double scale = std::sqrt(dt);
      for (std::size_t k = 1; k <= steps; ++k)
        for (int c = 0; c < d; ++c)
          out[k * d + c] = out[(k - 1) * d + c] + scale * s.next_normal();
      return;
    }
  }
}

std::vector<double> tabulate(const core::Trajectory& target, int d, double dt,
                             double horizon, std::size_t steps) {
  std::vector<double> tab((steps + 1) * static_cast<std::size_t>(d), 0.0);
  if (target.kind != core::Trajectory::Kind::Deterministic) return tab;
  target.validate(d, dt, horizon);
  for (std::size_t k = 0; k <= steps; ++k) {
    const core::Point g = target.path(static_cast<double>(k) * dt);
    for (int c = 0; c < d; ++c) tab[k * d + c] = g[c];
  }
  return tab;
}

core::Box path_window(const std::vector<double>& path, std::size_t n, int d,
                      double margin) {
  core::Point lo(d), hi(d);
  for (int c = 0; c < d; ++c) {
    lo[c] = path[c];
    hi[c] = path[c];
  }
  for (std::size_t k = 1; k < n; ++k)
    for (int c = 0; c < d; ++c) {
      lo[c] = std::min(lo[c], path[k * d + c]);
      hi[c] = std::max(hi[c], path[k * d + c]);
    }
  lo.array() -= margin;
  hi.array() += margin;
  return core::Box(std::move(lo), std::move(hi));
}

// One trial against possibly several targets sharing the node randomness.
// Returns per-target detection step (steps+1 means censored).
std::vector<std::size_t> run_trial(const core::SimConfig& config,
                                   std::uint64_t trial_seed,
                                   const std::vector<std::vector<double>>& paths,
                                   std::size_t steps) {
  const int d = config.d;
  const double r_sq = config.r * config.r;
  const std::size_t n_targets = paths.size();

  core::Box window = path_window(paths[0], steps + 1, d,
                                 config.r + config.domain.buffer);
  for (std::size_t j = 1; j < n_targets; ++j)
    window = window.union_with(
        path_window(paths[j], steps + 1, d, config.r + config.domain.buffer));

  core::Substream count_stream(trial_seed, kCountTag, 0);
  const std::uint64_t n =
      count_stream.next_poisson(config.lambda * window.volume());
  std::vector<double> pos(static_cast<std::size_t>(n) * d);
  std::vector<core::Substream> streams;
  streams.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    core::Substream s(trial_seed, kNodeTag, i);
    for (int c = 0; c < d; ++c)
      pos[i * d + c] = s.next_uniform(window.lo[c], window.hi[c]);
    streams.push_back(s);
  }

  std::vector<std::size_t> detected_step(n_targets, steps + 1);
  std::size_t remaining = n_targets;
  const double scale = std::sqrt(config.dt);
  for (std::size_t k = 0; k <= steps && remaining > 0; ++k) {
    if (k > 0)
      for (std::uint64_t i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c)
          pos[i * d + c] += scale * streams[i].next_normal();
    for (std::size_t j = 0; j < n_targets; ++j) {
      if (detected_step[j] <= steps) continue;
      const double* g = &paths[j][k * d];
      for (std::uint64_t i = 0; i < n; ++i) {
        if (core::euclid_sq_dist(&pos[i * d], g, d) <= r_sq) {
          detected_step[j] = k;
          --remaining;
          break;
        }
      }
    }
  }
  return detected_step;
}

}  // namespace

TailCurve tail_from_times(const std::vector<DetectionTrial>& trials, double dt,
                          double horizon) {
  std::vector<double> events;
  events.reserve(trials.size());
  for (const auto& t : trials)
    events.push_back(t.detected_at ? *t.detected_at : -1.0);
  return core::tail_from_event_times(events, dt, horizon);
}

std::vector<DetectionTrial> detection_trials(const core::SimConfig& config,
                                             const core::Trajectory& target,
                                             std::size_t trials,
                                             unsigned threads) {
  config.validate();
  check_buffer(config);
  const std::size_t steps = config.grid_steps();
  const auto tab = tabulate(target, config.d, config.dt, config.horizon, steps);

  std::vector<DetectionTrial> out(trials);
  core::parallel_for(trials, threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed =
        core::substream_key(config.seed, trial, kTrialTag);
    std::vector<std::vector<double>> paths(1);
    realize_target(target, config.d, config.dt, steps, trial_seed, &tab,
                   paths[0]);
    const auto step = run_trial(config, trial_seed, paths, steps)[0];
    out[trial].trial_index = trial;
    if (step <= steps)
      out[trial].detected_at = static_cast<double>(step) * config.dt;
    else
      out[trial].censored = true;
  });
  return out;
}

TailCurve simulate_detection(const core::SimConfig& config,
                             const core::Trajectory& target,
                             std::size_t trials, unsigned threads) {
  return tail_from_times(detection_trials(config, target, trials, threads),
                         config.dt, config.horizon);
}

CrosscheckReport detection_formula_crosscheck(const core::SimConfig& config,
                                              const core::Trajectory& target,
                                              double t, std::size_t trials,
                                              std::size_t paths) {
  core::SimConfig cfg = config;
  cfg.horizon = t;
  cfg.validate();

  const TailCurve direct = simulate_detection(cfg, target, trials);

  CrosscheckReport rep;
  rep.direct_survival = direct.at(t);
  rep.direct_std_error = direct.std_error_at(t);

  const std::uint64_t formula_seed = core::substream_key(cfg.seed, 0xF02F17ULL);
  if (target.kind != core::Trajectory::Kind::Brownian) {
    sausage::SausageSpec spec;
    spec.d = cfg.d;
    spec.r = cfg.r;
    spec.t = t;
    spec.drift = target;
    const auto vol = sausage::sausage_volume(spec, paths, cfg.dt, formula_seed);
    rep.formula_survival = std::exp(-cfg.lambda * vol.mean);
    rep.formula_std_error = cfg.lambda * rep.formula_survival * vol.std_error;
  } else {
    // outer expectation over target paths of exp(-lambda E[vol | g]); the
    // inner Monte Carlo noise inflates the exponential, so divide it back out
    const std::size_t steps = cfg.grid_steps();
    const std::size_t outer = std::max<std::size_t>(paths / 64, 16);
    const std::size_t inner = 64;
    core::RunningMoments survival;
    std::vector<double> g_flat;
    const double scale = std::sqrt(cfg.dt);
    for (std::size_t j = 0; j < outer; ++j) {
      core::Substream gs(formula_seed, kTargetTag, j);
      g_flat.assign((steps + 1) * static_cast<std::size_t>(cfg.d), 0.0);
      for (std::size_t k = 1; k <= steps; ++k)
        for (int c = 0; c < cfg.d; ++c)
          g_flat[k * cfg.d + c] =
              g_flat[(k - 1) * cfg.d + c] + scale * gs.next_normal();
      const auto cond = sausage::sausage_volume_conditional(
          cfg.d, cfg.r, g_flat, steps, cfg.dt, inner,
          core::substream_key(formula_seed, j, 0x1EEE2));
      const double noise_var =
          cfg.lambda * cfg.lambda * cond.std_error * cond.std_error;
      survival.add(std::exp(-cfg.lambda * cond.mean - 0.5 * noise_var));
    }
    rep.formula_survival = survival.mean();
    rep.formula_std_error = survival.std_error();
  }

  const double se = std::sqrt(rep.direct_std_error * rep.direct_std_error +
                              rep.formula_std_error * rep.formula_std_error);
  rep.z = se > 0 ? (rep.direct_survival - rep.formula_survival) / se : 0.0;
  rep.pass = std::abs(rep.direct_survival - rep.formula_survival) <= 3.0 * se;
  return rep;
}

std::vector<DetectionTrial> compact_detection_trials(
    const coverage::TargetSet& K, const core::SimConfig& config,
    std::size_t trials, unsigned threads) {
  config.validate();
  check_buffer(config);
  if (K.dim() != config.d)
    throw std::invalid_argument("compact_detection_trials: dim mismatch");
  const std::size_t steps = config.grid_steps();
  const coverage::EnlargedSetOracle oracle(K, config.r, config.r / 10.0);
  const core::Box window =
      oracle.enlarged_bounding_box().inflated(config.domain.buffer);
  const int d = config.d;
  const double scale = std::sqrt(config.dt);

  std::vector<DetectionTrial> out(trials);
  core::parallel_for(trials, threads, [&](std::size_t trial) {
    std::vector<double> pos;
    const std::uint64_t trial_seed =
        core::substream_key(config.seed, trial, kTrialTag);
    core::Substream count_stream(trial_seed, kCountTag, 0);
    const std::uint64_t n =
        count_stream.next_poisson(config.lambda * window.volume());
    pos.resize(static_cast<std::size_t>(n) * d);
    std::vector<core::Substream> streams;
    streams.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      core::Substream s(trial_seed, kNodeTag, i);
      for (int c = 0; c < d; ++c)
        pos[i * d + c] = s.next_uniform(window.lo[c], window.hi[c]);
      streams.push_back(s);
    }

    std::size_t detected = steps + 1;
    for (std::size_t k = 0; k <= steps && detected > steps; ++k) {
      if (k > 0)
        for (std::uint64_t i = 0; i < n; ++i)
          for (int c = 0; c < d; ++c)
            pos[i * d + c] += scale * streams[i].next_normal();
      for (std::uint64_t i = 0; i < n; ++i)
        if (oracle.contains(&pos[i * d])) {
          detected = k;
          break;
        }
    }
    out[trial].trial_index = trial;
    if (detected <= steps)
      out[trial].detected_at = static_cast<double>(detected) * config.dt;
    else
      out[trial].censored = true;
  });
  return out;
}

TailCurve compact_detection_tail(const coverage::TargetSet& K,
                                 const core::SimConfig& config,
                                 std::size_t trials, unsigned threads) {
  return tail_from_times(compact_detection_trials(K, config, trials, threads),
                         config.dt, config.horizon);
}

StayPutReport stay_put_comparison(const core::SimConfig& config,
                                  const std::vector<double>& eval_times,
                                  std::size_t trials) {
  config.validate();
  check_buffer(config);
  if (eval_times.empty())
    throw std::invalid_argument("stay_put_comparison: no eval times");
  const std::size_t steps = config.grid_steps();
  const int d = config.d;

  core::Point unit_velocity = core::Point::Zero(d);
  unit_velocity[0] = 1.0;
  const core::Trajectory linear = core::Trajectory::linear(unit_velocity);
  const auto linear_tab = tabulate(linear, d, config.dt, config.horizon, steps);

  std::vector<DetectionTrial> trials_stat(trials), trials_brown(trials),
      trials_lin(trials);
  // per trial, per eval time: indicator differences for paired errors
  std::vector<core::RunningMoments> diff_b(eval_times.size()),
      diff_l(eval_times.size());

  std::vector<std::vector<double>> paths(3);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed =
        core::substream_key(config.seed, trial, kTrialTag);
    realize_target(core::Trajectory::stationary(), d, config.dt, steps,
                   trial_seed, nullptr, paths[0]);
    realize_target(core::Trajectory::brownian(), d, config.dt, steps,
                   trial_seed, nullptr, paths[1]);
    paths[2] = linear_tab;
    const auto det = run_trial(config, trial_seed, paths, steps);
    auto fill = [&](std::vector<DetectionTrial>& dst, std::size_t j) {
      dst[trial].trial_index = trial;
      if (det[j] <= steps)
        dst[trial].detected_at = static_cast<double>(det[j]) * config.dt;
      else
        dst[trial].censored = true;
    };
    fill(trials_stat, 0);
    fill(trials_brown, 1);
    fill(trials_lin, 2);
    for (std::size_t e = 0; e < eval_times.size(); ++e) {
      const auto ke = static_cast<std::size_t>(
          std::llround(eval_times[e] / config.dt));
      const auto alive = [&](std::size_t j) { return det[j] > ke ? 1.0 : 0.0; };
      diff_b[e].add(alive(0) - alive(1));
      diff_l[e].add(alive(0) - alive(2));
    }
  }

  StayPutReport rep;
  rep.stationary = tail_from_times(trials_stat, config.dt, config.horizon);
  rep.brownian = tail_from_times(trials_brown, config.dt, config.horizon);
  rep.linear = tail_from_times(trials_lin, config.dt, config.horizon);
  rep.eval_times = eval_times;
  rep.asserted = d == 1;
  for (std::size_t e = 0; e < eval_times.size(); ++e) {
    rep.margin_brownian.push_back(diff_b[e].mean());
    rep.margin_brownian_se.push_back(diff_b[e].std_error());
    rep.margin_linear.push_back(diff_l[e].mean());
    rep.margin_linear_se.push_back(diff_l[e].std_error());
    if (rep.asserted) {
      if (diff_b[e].mean() < -3.0 * diff_b[e].std_error()) rep.pass = false;
      if (diff_l[e].mean() < -3.0 * diff_l[e].std_error()) rep.pass = false;
    }
  }
  return rep;
}

}  // namespace mobigg::detection
