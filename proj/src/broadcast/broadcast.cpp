#include "mobigg/broadcast/broadcast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobigg/core/domain.hpp"
#include "mobigg/core/ensemble.hpp"
#include "mobigg/core/parallel.hpp"
#include "mobigg/core/rng.hpp"
#include "mobigg/graph/geometric_graph.hpp"

namespace mobigg::broadcast {

namespace {

constexpr std::uint64_t kTrialTag = 0xB20ADULL;
constexpr std::uint64_t kCountTag = 0xC0B7ULL;
constexpr std::uint64_t kNodeTag = 0x90B7ULL;
constexpr int kSubSteps = 10;  // wrap sub-steps per unit time

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

BroadcastSample simulate_broadcast(double n, double lambda, double r, int d,
                                   std::size_t trials, int max_steps,
                                   std::uint64_t seed, double lambda_c,
                                   double margin, unsigned threads) {
  if (n <= 0 || lambda <= 0 || r <= 0) throw std::invalid_argument("simulate_broadcast: bad parameters");
  if (d < 1 || d > 4) throw std::invalid_argument("simulate_broadcast: d in 1..4");
  if (lambda < lambda_c * (1.0 + margin))
    throw std::invalid_argument(
        "simulate_broadcast: lambda is not safely above the calibrated "
        "critical intensity; no giant component regime");

  const double side = std::pow(n / lambda, 1.0 / d);
  const core::DomainSpec domain = core::DomainSpec::torus(side);
  const double sub_dt = 1.0 / kSubSteps;
  const double scale = std::sqrt(sub_dt);

  BroadcastSample sample;
  sample.trials.resize(trials);
  core::parallel_for(trials, threads, [&](std::size_t trial) {
    BroadcastTrial& out = sample.trials[trial];

    // resample empty draws; an empty torus has no broadcast problem
    std::uint64_t node_total = 0;
    std::uint64_t attempt = 0;
    std::uint64_t trial_seed = 0;
    for (;;) {
      trial_seed = core::substream_key(seed, trial, kTrialTag + attempt);
      core::Substream count_stream(trial_seed, kCountTag, 0);
      node_total = count_stream.next_poisson(n);
      if (node_total > 0) break;
      ++attempt;
      ++out.resamples;
    }
    out.node_count = node_total;

    std::vector<double> pos(static_cast<std::size_t>(node_total) * d);
    std::vector<core::Substream> streams;
    streams.reserve(node_total);
    for (std::uint64_t i = 0; i < node_total; ++i) {
      core::Substream s(trial_seed, kNodeTag, i);
      for (int k = 0; k < d; ++k) pos[i * d + k] = s.next_uniform(0.0, side);
      streams.push_back(s);
    }

    std::vector<std::uint8_t> informed(node_total, 0);
    std::vector<std::uint8_t> prev_giant, cur_giant;
    bool have_prev_giant = false;

    for (int step = 0; step <= max_steps; ++step) {
      core::PointMatrix m(static_cast<Eigen::Index>(node_total), d);
      for (std::uint64_t i = 0; i < node_total; ++i)
        for (int k = 0; k < d; ++k)
          m(static_cast<Eigen::Index>(i), k) = pos[i * d + k];
      const graph::GeometricGraph g(std::move(m), r, side);

      if (step == 0) {
        // message originates at the node nearest the torus center
        double center[4];
        for (int k = 0; k < d; ++k) center[k] = side / 2.0;
        std::size_t origin = 0;
        double best = std::numeric_limits<double>::max();
        for (std::uint64_t i = 0; i < node_total; ++i) {
          const double dist = core::torus_sq_dist(&pos[i * d], center, d, side);
          if (dist < best) {
            best = dist;
            origin = i;
          }
        }
        informed[origin] = 1;
      }

      // component-wide exchange
      std::vector<std::uint8_t> comp_informed(g.component_count(), 0);
      for (std::uint64_t i = 0; i < node_total; ++i)
        if (informed[i]) comp_informed[g.component_of(i)] = 1;
      std::size_t informed_count = 0;
      for (std::uint64_t i = 0; i < node_total; ++i) {
        if (comp_informed[g.component_of(i)]) informed[i] = 1;
        if (informed[i]) ++informed_count;
      }

      // giant-component continuity across consecutive steps
      const auto giant = graph::giant_component(g);
      if (giant.exists) {
        cur_giant.assign(node_total, 0);
        for (std::uint64_t i = 0; i < node_total; ++i)
          if (g.component_of(i) == *giant.component_id) cur_giant[i] = 1;
        if (have_prev_giant) {
          ++out.overlap_checks;
          bool shared = false;
          for (std::uint64_t i = 0; i < node_total && !shared; ++i)
            shared = prev_giant[i] && cur_giant[i];
          if (shared) ++out.overlap_hits;
        }
        prev_giant = cur_giant;
        have_prev_giant = true;
      } else {
        have_prev_giant = false;
      }

      if (informed_count == node_total) {
        out.t_broad = step;
        break;
      }
      if (step == max_steps) break;

      for (std::uint64_t i = 0; i < node_total; ++i)
        for (int sub = 0; sub < kSubSteps; ++sub)
          for (int k = 0; k < d; ++k)
            pos[i * d + k] = core::torus_wrap(
                pos[i * d + k] + scale * streams[i].next_normal(), side);
    }
    out.censored = out.t_broad < 0;
  });

  std::vector<double> finished;
  for (const auto& t : sample.trials) {
    if (t.censored)
      ++sample.censored;
    else
      finished.push_back(static_cast<double>(t.t_broad));
    sample.overlap_checks += t.overlap_checks;
    sample.overlap_hits += t.overlap_hits;
  }
  sample.median = median_of(finished);
  return sample;
}

BroadcastStudy broadcast_scaling_study(const std::vector<double>& n_list,
                                       double lambda, double r, int d,
                                       std::size_t trials, int max_steps,
                                       std::uint64_t seed, double lambda_c,
                                       double margin, unsigned threads) {
  if (n_list.size() < 3)
    throw std::invalid_argument("broadcast_scaling_study: need >= 3 sizes");
  for (std::size_t i = 2; i < n_list.size(); ++i) {
    const double q0 = n_list[1] / n_list[0];
    if (std::abs(n_list[i] / n_list[i - 1] - q0) > 1e-6 * q0)
      throw std::invalid_argument("broadcast_scaling_study: n_list must be geometric");
  }

  BroadcastStudy study;
  std::vector<double> xs, ys;
  std::vector<std::vector<double>> finished_per_n;
  std::size_t checks = 0, hits = 0;
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    const auto s = simulate_broadcast(n_list[j], lambda, r, d, trials, max_steps,
                                      core::substream_key(seed, j, 0xB2D1ULL),
                                      lambda_c, margin, threads);
    checks += s.overlap_checks;
    hits += s.overlap_hits;
    std::vector<double> finished;
    for (const auto& t : s.trials)
      if (!t.censored) finished.push_back(static_cast<double>(t.t_broad));

    // bootstrap standard error of the median
    core::Substream bs(seed, 0xB007ULL, j);
    core::RunningMoments boot;
    const std::size_t B = 300;
    std::vector<double> resample(finished.size());
    for (std::size_t b = 0; b < B && !finished.empty(); ++b) {
      for (auto& x : resample)
        x = finished[static_cast<std::size_t>(bs.next_unit() *
                                              static_cast<double>(finished.size()))];
      boot.add(median_of(resample));
    }

    BroadcastStudyRow row;
    row.n = n_list[j];
    row.median = s.median;
    row.median_se = boot.std_dev();
    row.censored = s.censored;
    study.rows.push_back(row);
    finished_per_n.push_back(std::move(finished));
    xs.push_back(std::log(n_list[j]));
    ys.push_back(s.median);
  }
  study.fit = core::linear_fit(xs, ys);
  study.overlap_fraction =
      checks > 0 ? static_cast<double>(hits) / static_cast<double>(checks) : 1.0;

  // sub-linearity: quadrupling n must not double the median (3 sigma slack)
  study.sublinear_pass = true;
  bool any_pair = false;
  for (std::size_t j = 0; j + 1 < study.rows.size(); ++j) {
    const double q = study.rows[j + 1].n / study.rows[j].n;
    if (q < 3.9 || q > 4.1) continue;
    any_pair = true;
    const double lhs = study.rows[j + 1].median;
    const double rhs = 2.0 * study.rows[j].median;
    const double se = std::sqrt(
        study.rows[j + 1].median_se * study.rows[j + 1].median_se +
        4.0 * study.rows[j].median_se * study.rows[j].median_se);
    if (lhs > rhs + 3.0 * se) study.sublinear_pass = false;
  }
  if (!any_pair) study.sublinear_pass = false;
  return study;
}

}  // namespace mobigg::broadcast
