// Acceptance suite: one pass/fail line per criterion, exit code = failures.
//
// Statistical criteria run at the stated sample sizes and tolerances; the
// asymptotic constants of the growth laws are exercised as property checks
// (regression shape, ratios, monotonicity), not as numeric limits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mobigg/broadcast/broadcast.hpp"
#include "mobigg/core/parallel.hpp"
#include "mobigg/core/rng.hpp"
#include "mobigg/core/stats.hpp"
#include "mobigg/coverage/coverage.hpp"
#include "mobigg/detection/detection.hpp"
#include "mobigg/graph/geometric_graph.hpp"
#include "mobigg/experiments/experiments.hpp"
#include "mobigg/percolation/percolation.hpp"
#include "mobigg/sausage/sausage.hpp"
#include "../oracles.hpp"

using namespace mobigg;

namespace {

constexpr std::uint64_t kSeed = 0x5EEDACCE97ULL;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

core::SimConfig boxed_config(int d, double lambda, double r, double dt,
                             double horizon, std::uint64_t seed) {
  core::SimConfig cfg;
  cfg.d = d;
  cfg.lambda = lambda;
  cfg.r = r;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.domain = core::DomainSpec::boxed(1.0, core::required_buffer(r, horizon));
  return cfg;
}

double closed_form_1d(double t, double r) {
  return std::sqrt(8.0 * t / M_PI) + 2.0 * r;
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion_detection_identity_1d() {
  const auto cfg = boxed_config(1, 1.0, 0.5, 1e-4, 4.0, kSeed + 1);
  const auto curve =
      detection::simulate_detection(cfg, core::Trajectory::stationary(), 10000);
  Outcome out;
  out.pass = true;
  for (const double t : {0.25, 1.0, 4.0}) {
    const double expected = std::exp(-cfg.lambda * closed_form_1d(t, cfg.r));
    const double got = curve.at(t);
    const double se = curve.std_error_at(t);
    const bool ok = std::abs(got - expected) <= 3.0 * se;
    out.pass = out.pass && ok;
    out.detail += fmt("t=%.2f: %.4f vs %.4f (3se %.4f)%s ", t, got, expected,
                      3.0 * se, ok ? "" : " <-");
  }
  return out;
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_detection_oracle_2d() {
  const auto cfg = boxed_config(2, 1.0, 1.0, 1e-3, 1.0, kSeed + 2);
  const auto curve =
      detection::simulate_detection(cfg, core::Trajectory::stationary(), 10000);
  Outcome out;
  out.pass = true;
  for (const double t : {0.5, 1.0}) {
    sausage::SausageSpec spec;
    spec.d = 2;
    spec.r = 1.0;
    spec.t = t;
    const auto vol = sausage::sausage_volume(spec, 10000, cfg.dt, kSeed + 20);
    const double formula = std::exp(-cfg.lambda * vol.mean);
    const double formula_se = cfg.lambda * formula * vol.std_error;
    const double direct = curve.at(t);
    const double direct_se = curve.std_error_at(t);
    const double se =
        std::sqrt(formula_se * formula_se + direct_se * direct_se);
    const bool ok = std::abs(direct - formula) <= 3.0 * se;
    out.pass = out.pass && ok;
    out.detail += fmt("t=%.1f: direct %.5f vs exp(-lambda V) %.5f (3se %.5f)%s ",
                      t, direct, formula, 3.0 * se, ok ? "" : " <-");
  }
  return out;
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_sausage_closed_form() {
  Outcome out;
  out.pass = true;
  for (const double t : {0.25, 1.0, 4.0}) {
    sausage::SausageSpec spec;
    spec.d = 1;
    spec.r = 0.5;
    spec.t = t;
    const auto rep =
        sausage::sausage_dt_refinement(spec, 10000, 1e-4, 4, kSeed + 3);
    const double exact = closed_form_1d(t, spec.r);
    const bool close = std::abs(rep.coarse.mean - exact) <= 0.02 * exact;
    const bool refined = std::abs(rep.diff_mean) < 0.01 * exact;
    out.pass = out.pass && close && refined;
    out.detail += fmt("t=%.2f: %.4f vs %.4f, dt-vs-dt/4 %.4f%s ", t,
                      rep.coarse.mean, exact, rep.diff_mean,
                      close && refined ? "" : " <-");
  }
  return out;
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_initial_ball() {
  struct Case {
    int d;
    double lambda, r;
  };
  Outcome out;
  out.pass = true;
  for (const Case c : {Case{1, 1.0, 0.5}, Case{2, 1.0, 1.0}, Case{3, 0.3, 1.0}}) {
    const auto cfg = boxed_config(c.d, c.lambda, c.r, 1e-2, 1e-2, kSeed + 4 + c.d);
    const auto curve = detection::simulate_detection(
        cfg, core::Trajectory::stationary(), 10000);
    const double expected =
        std::exp(-c.lambda * core::unit_ball_volume(c.d) * std::pow(c.r, c.d));
    const double got = curve.survival.front();
    const double se = core::binomial_std_error(expected, 10000);
    const bool ok = std::abs(got - expected) <= 3.0 * se;
    out.pass = out.pass && ok;
    out.detail += fmt("d=%d: %.4f vs %.4f%s ", c.d, got, expected,
                      ok ? "" : " <-");
  }
  return out;
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_stay_put() {
  const auto cfg = boxed_config(1, 1.0, 0.5, 1e-3, 4.0, kSeed + 5);
  const auto rep = detection::stay_put_comparison(cfg, {1.0, 4.0}, 5000);
  Outcome out;
  out.pass = rep.asserted && rep.pass;
  for (std::size_t e = 0; e < rep.eval_times.size(); ++e)
    out.detail += fmt("t=%.0f: margin-vs-brownian %.4f (3se %.4f) ",
                      rep.eval_times[e], rep.margin_brownian[e],
                      3.0 * rep.margin_brownian_se[e]);
  return out;
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_component_oracle() {
  std::size_t checked = 0;
  for (std::size_t instance = 0; instance < 200; ++instance) {
    core::Substream s(kSeed + 6, instance, 0);
    const int d = 1 + static_cast<int>(s.next_u64() % 3);
    const bool torus = s.next_unit() < 0.33;
    const double side = 9.0;
    const std::size_t n = 10 + s.next_u64() % 491;
    const double r = 0.3 + 0.9 * s.next_unit();
    core::PointMatrix pts(static_cast<Eigen::Index>(n), d);
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k)
        pts(static_cast<Eigen::Index>(i), k) =
            torus ? s.next_uniform(0.0, side)
                  : s.next_uniform(-side / 2, side / 2);
    std::optional<double> torus_side;
    if (torus) torus_side = side;
    const graph::GeometricGraph g(pts, r, torus_side);
    const auto oracle = test_oracles::bfs_components(pts, r, torus_side);
    if (!test_oracles::same_partition(g.labels(), oracle))
      return {false, fmt("partition mismatch at instance %zu", instance)};
    ++checked;
  }
  return {true, fmt("%zu instances matched exactly", checked)};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_cover_point_reduction() {
  const auto cfg = boxed_config(1, 1.0, 0.5, 1e-3, 2.0, kSeed + 7);
  const std::size_t trials = 10000;
  const auto point =
      coverage::build_target(coverage::TargetKind::Point, 1, 1.0, 0.1);
  const auto cover = coverage::estimate_cover_time(point, cfg, trials);
  auto det_cfg = cfg;
  det_cfg.seed = kSeed + 70;
  const auto det = detection::detection_trials(
      det_cfg, core::Trajectory::stationary(), trials);
  std::vector<double> cover_times, det_times;
  for (const double t : cover.per_trial)
    cover_times.push_back(t >= 0 ? t : 1e9);
  for (const auto& t : det)
    det_times.push_back(t.detected_at ? *t.detected_at : 1e9);
  const double dist = core::ks_distance(cover_times, det_times);
  const double threshold = core::ks_threshold(trials, trials, 0.0027);
  return {dist < threshold, fmt("KS %.4f vs threshold %.4f", dist, threshold)};
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_coverage_growth() {
  core::SimConfig cfg;
  cfg.d = 3;
  cfg.lambda = 0.05;
  cfg.r = 2.0;
  cfg.dt = 0.05;
  cfg.horizon = 50.0;
  cfg.seed = kSeed + 8;
  cfg.domain = core::DomainSpec::boxed(1.0, core::required_buffer(2.0, 50.0));
  const auto study = coverage::coverage_scaling_study(
      coverage::TargetKind::Cube, 3, {8.0, 16.0, 32.0, 64.0}, cfg, 1.0, 24);
  std::size_t censored = 0;
  for (const auto& row : study.rows) censored += row.censored;
  const bool r2_ok = study.fit.r_squared >= 0.9;
  const bool ratio_ok = study.seg_cube_ratio > 1.0 / 3.0 - 0.15 &&
                        study.seg_cube_ratio < 1.0 / 3.0 + 0.15;
  Outcome out;
  out.pass = r2_ok && ratio_ok && censored == 0;
  out.detail = fmt("R^2 %.3f, seg/cube %.3f (+-%.3f), means", study.fit.r_squared,
                   study.seg_cube_ratio, study.seg_cube_ratio_se);
  for (const auto& row : study.rows)
    out.detail += fmt(" %.1f", row.mean);
  out.detail += fmt(", cv %.2f", study.cv_largest);
  return out;
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_cantor_dimension() {
  const int level = 5;
  const auto cantor = coverage::build_target(coverage::TargetKind::CantorIterate,
                                             1, 1.0, 1.0 / 1200.0, level);
  std::vector<double> sides;
  for (int j = 1; j <= level; ++j) sides.push_back(std::pow(3.0, -j));
  const double slope = coverage::box_dimension_estimate(cantor, sides);
  const double expected = std::log(2.0) / std::log(3.0);
  const double rel = std::abs(slope - expected) / expected;
  return {rel < 0.05, fmt("slope %.4f vs log2/log3 %.4f (rel %.3f)", slope,
                          expected, rel)};
}

// --------------------------------------------------------------- criterion 10

Outcome criterion_coupling() {
  percolation::CouplingSpec spec;
  spec.d = 2;
  spec.beta = 2.0;
  spec.ell = 4.0;
  spec.eps = 0.5;
  spec.Delta = 4096.0;  // 16 d^2 ell^2 / eps^2
  spec.K_prime = 40.0;  // the cube all statistical checks run on
  // the separation rule fixes the outer cube: K = K' + 2R, whole cells
  spec.K = std::ceil((spec.K_prime + 2.0 * spec.separation_radius()) / spec.ell) *
           spec.ell;
  spec.validate();

  const std::size_t runs = 200;
  const double phi_intensity = 6.0 * spec.beta;
  const auto cells_per_axis =
      static_cast<std::size_t>(std::llround(spec.K / spec.ell));
  const core::Box qk = core::Box::centered_cube(2, spec.K);

  std::size_t successes = 0;
  std::size_t joint = 0, thinned = 0;
  double psi = 0.0;
  bool subset_exact = true;
  std::vector<double> xi_cell_counts, phi_cell_counts;
  const auto inner_cells_per_axis =
      static_cast<std::size_t>(std::llround(spec.K_prime / spec.ell));

  for (std::size_t run = 0; run < runs; ++run) {
    // Phi_0 with a comfortable surplus over the beta ell^d floor
    core::SimConfig pcfg;
    pcfg.d = 2;
    pcfg.lambda = phi_intensity;
    pcfg.r = 1.0;
    pcfg.dt = 1.0;
    pcfg.horizon = 1.0;
    pcfg.domain = core::DomainSpec::boxed(spec.K, 0.0);
    core::NodeEnsemble phi0;
    for (std::uint64_t attempt = 0;; ++attempt) {
      pcfg.seed = core::substream_key(kSeed + 10, run * 64 + attempt, 0xF1);
      phi0 = core::sample_poisson_points(pcfg, qk);
      std::vector<std::size_t> counts(cells_per_axis * cells_per_axis, 0);
      for (std::size_t i = 0; i < phi0.size(); ++i) {
        const auto cx = std::clamp<long long>(
            static_cast<long long>(std::floor(
                (phi0.positions(static_cast<Eigen::Index>(i), 0) + spec.K / 2) /
                spec.ell)),
            0, static_cast<long long>(cells_per_axis) - 1);
        const auto cy = std::clamp<long long>(
            static_cast<long long>(std::floor(
                (phi0.positions(static_cast<Eigen::Index>(i), 1) + spec.K / 2) /
                spec.ell)),
            0, static_cast<long long>(cells_per_axis) - 1);
        ++counts[static_cast<std::size_t>(cy) * cells_per_axis +
                 static_cast<std::size_t>(cx)];
      }
      const double floor_count = spec.beta * spec.ell * spec.ell;
      bool ok = true;
      for (const auto c : counts)
        if (static_cast<double>(c) < floor_count) ok = false;
      if (ok) break;
    }

    const auto result = percolation::run_coupling(
        spec, phi0, core::substream_key(kSeed + 10, run, 0xC2));
    psi = result.psi;
    joint += result.jointly_moved;
    thinned += result.pair_thinned;
    if (!result.success) continue;
    ++successes;

    // exact subset: every xi node coincides bitwise with a phi_Delta node
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> phi_index;
    phi_index.reserve(result.phi_delta.size());
    const auto hash_pos = [](double x, double y) {
      std::uint64_t hx, hy;
      std::memcpy(&hx, &x, 8);
      std::memcpy(&hy, &y, 8);
      return core::substream_key(hx, hy, 0);
    };
    for (std::size_t i = 0; i < result.phi_delta.size(); ++i)
      phi_index[hash_pos(result.phi_delta.positions(static_cast<Eigen::Index>(i), 0),
                         result.phi_delta.positions(static_cast<Eigen::Index>(i), 1))]
          .push_back(i);
    for (std::size_t i = 0; i < result.xi.size() && subset_exact; ++i) {
      const double x = result.xi.positions(static_cast<Eigen::Index>(i), 0);
      const double y = result.xi.positions(static_cast<Eigen::Index>(i), 1);
      bool found = false;
      const auto it = phi_index.find(hash_pos(x, y));
      if (it != phi_index.end())
        for (const std::size_t j : it->second)
          if (result.phi_delta.positions(static_cast<Eigen::Index>(j), 0) == x &&
              result.phi_delta.positions(static_cast<Eigen::Index>(j), 1) == y)
            found = true;
      subset_exact = subset_exact && found;
    }

    // inner-cube cell counts for the Poisson and decorrelation checks
    std::vector<double> xi_counts(inner_cells_per_axis * inner_cells_per_axis, 0);
    for (std::size_t i = 0; i < result.xi.size(); ++i) {
      const double x = result.xi.positions(static_cast<Eigen::Index>(i), 0);
      const double y = result.xi.positions(static_cast<Eigen::Index>(i), 1);
      const auto cx = std::clamp<long long>(
          static_cast<long long>(std::floor((x + spec.K_prime / 2) / spec.ell)),
          0, static_cast<long long>(inner_cells_per_axis) - 1);
      const auto cy = std::clamp<long long>(
          static_cast<long long>(std::floor((y + spec.K_prime / 2) / spec.ell)),
          0, static_cast<long long>(inner_cells_per_axis) - 1);
      xi_counts[static_cast<std::size_t>(cy) * inner_cells_per_axis +
                static_cast<std::size_t>(cx)] += 1.0;
    }
    std::vector<double> phi_counts(inner_cells_per_axis * inner_cells_per_axis, 0);
    for (std::size_t i = 0; i < phi0.size(); ++i) {
      const double x = phi0.positions(static_cast<Eigen::Index>(i), 0);
      const double y = phi0.positions(static_cast<Eigen::Index>(i), 1);
      if (std::abs(x) > spec.K_prime / 2 || std::abs(y) > spec.K_prime / 2)
        continue;
      const auto cx = std::clamp<long long>(
          static_cast<long long>(std::floor((x + spec.K_prime / 2) / spec.ell)),
          0, static_cast<long long>(inner_cells_per_axis) - 1);
      const auto cy = std::clamp<long long>(
          static_cast<long long>(std::floor((y + spec.K_prime / 2) / spec.ell)),
          0, static_cast<long long>(inner_cells_per_axis) - 1);
      phi_counts[static_cast<std::size_t>(cy) * inner_cells_per_axis +
                 static_cast<std::size_t>(cx)] += 1.0;
    }
    xi_cell_counts.insert(xi_cell_counts.end(), xi_counts.begin(), xi_counts.end());
    phi_cell_counts.insert(phi_cell_counts.end(), phi_counts.begin(),
                           phi_counts.end());
  }

  const double success_rate =
      static_cast<double>(successes) / static_cast<double>(runs);

  core::RunningMoments m;
  for (const double c : xi_cell_counts) m.add(c);
  const double cell_mean = (1.0 - spec.eps) * spec.beta * spec.ell * spec.ell;
  const double mean_z = (m.mean() - cell_mean) /
                        std::sqrt(cell_mean / static_cast<double>(m.count()));
  const double var_z = core::poisson_variance_z(m.variance(), cell_mean, m.count());
  const double corr = core::sample_correlation(xi_cell_counts, phi_cell_counts);
  const double corr_threshold = 3.0 / std::sqrt(static_cast<double>(runs));

  const double realized =
      static_cast<double>(joint) / static_cast<double>(joint + thinned);
  const double psi_se =
      std::sqrt(psi * (1 - psi) / static_cast<double>(joint + thinned));
  const bool psi_ok = std::abs(realized - (1.0 - psi)) <= 3.0 * psi_se;

  Outcome out;
  out.pass = success_rate >= 0.95 && subset_exact && std::abs(mean_z) <= 3.0 &&
             std::abs(var_z) <= 3.0 && std::abs(corr) < corr_threshold && psi_ok;
  out.detail = fmt(
      "success %.3f, subset %s, count mean z %.2f, var z %.2f, corr %.4f "
      "(thr %.3f), 1-int(g) %.4f vs realized thinning %.4f [K=%g from K'=40]",
      success_rate, subset_exact ? "exact" : "BROKEN", mean_z, var_z, corr,
      corr_threshold, psi, 1.0 - realized, spec.K);
  return out;
}

// --------------------------------------------------------------- criterion 11

Outcome criterion_psi_bound() {
  std::size_t checked = 0;
  for (const int d : {1, 2, 3})
    for (const double eps : {0.2, 0.5, 0.9})
      for (const double rho : {0.1, 1.0, 5.0}) {
        const double Delta = 16.0 * d * d * rho * rho / (eps * eps);
        const double R = 2.0 * std::sqrt(d * Delta * std::log(8.0 * d / eps));
        const auto rep = percolation::check_psi_bound(d, eps, rho, Delta, R);
        if (!rep.applicable || !rep.pass)
          return {false, fmt("failed at d=%d eps=%.1f rho=%.1f: integral %.6f",
                             d, eps, rho, rep.integral)};
        ++checked;
      }
  return {true, fmt("integral >= 1 - eps/2 on all %zu grid points", checked)};
}

// --------------------------------------------------------------- criterion 12

Outcome criterion_density() {
  const auto tess = percolation::Tessellation::make(2, 20.0, 5.0, 0.5, 4.0);
  const int t = 100;
  const std::size_t runs = 100;
  std::size_t good_runs = 0;
  double min_fraction = 1.0;
  for (std::size_t run = 0; run < runs; ++run) {
    core::SimConfig cfg;
    cfg.d = 2;
    cfg.lambda = 4.0;
    cfg.r = 1.0;
    cfg.dt = 1.0;
    cfg.horizon = static_cast<double>(t);
    cfg.seed = core::substream_key(kSeed + 12, run, 0);
    cfg.domain = core::DomainSpec::boxed(
        1.0, core::required_buffer(cfg.r, static_cast<double>(t)));
    const auto rep = percolation::density_fraction(cfg, tess, t);
    min_fraction = std::min(min_fraction, rep.fraction);
    if (rep.fraction >= 0.99) ++good_runs;
  }
  return {good_runs >= 95,
          fmt("%zu/%zu runs with dense fraction >= 0.99 (min %.3f)", good_runs,
              runs, min_fraction)};
}

// --------------------------------------------------------------- criterion 13

Outcome criterion_perc_tail(double lambda_c) {
  core::SimConfig cfg;
  cfg.d = 2;
  cfg.lambda = 2.0 * lambda_c;
  cfg.r = 1.0;
  cfg.dt = 1.0;
  const int horizon = 50;
  cfg.horizon = static_cast<double>(horizon);
  cfg.seed = kSeed + 13;
  cfg.domain = core::DomainSpec::boxed(
      1.0, core::required_buffer(1.0, static_cast<double>(horizon)));
  const auto res = percolation::estimate_perc_tail(
      cfg, 30.0, 1000, horizon, core::Trajectory::stationary(), lambda_c);
  std::size_t finite = 0;
  for (const auto& t : res.trials)
    if (t.perc_at) ++finite;
  bool monotone = true;
  for (std::size_t k = 1; k < res.curve.survival.size(); ++k)
    monotone = monotone && res.curve.survival[k] <= res.curve.survival[k - 1];
  const double frac = static_cast<double>(finite) / 1000.0;
  return {frac >= 0.99 && monotone,
          fmt("percolated %.3f, curve monotone %s, survival(0) %.3f", frac,
              monotone ? "yes" : "NO", res.curve.survival.front())};
}

// --------------------------------------------------------------- criterion 14

Outcome criterion_broadcast(double lambda_c) {
  const double lambda = 2.0 * lambda_c;
  const auto study = broadcast::broadcast_scaling_study(
      {500.0, 2000.0, 8000.0}, lambda, 1.0, 2, 100, 400, kSeed + 14, lambda_c);
  std::size_t censored = 0;
  for (const auto& row : study.rows) censored += row.censored;
  Outcome out;
  out.pass = censored == 0 && study.sublinear_pass &&
             study.overlap_fraction >= 0.99;
  out.detail = fmt("medians %g/%g/%g, censored %zu, giant overlap %.4f",
                   study.rows[0].median, study.rows[1].median,
                   study.rows[2].median, censored, study.overlap_fraction);
  return out;
}

// --------------------------------------------------------------- criterion 15

Outcome criterion_reproducibility() {
  experiments::ExperimentSpec spec;
  spec.kind = experiments::ExperimentKind::Detect;
  spec.seed = kSeed + 15;
  spec.parameters = {{"d", "1"},      {"lambda", "1"},    {"r", "0.5"},
                     {"dt", "0.002"}, {"horizon", "0.5"}, {"trials", "400"}};
  std::vector<std::string> bodies;
  for (const unsigned threads : {1u, 4u, 8u}) {
    experiments::RunOptions options;
    options.threads = threads;
    bodies.push_back(
        experiments::csv_body(experiments::run_experiment(spec, options)));
  }
  const bool equal = bodies[0] == bodies[1] && bodies[1] == bodies[2];
  return {equal, fmt("csv bodies at 1/4/8 threads %s (%zu bytes)",
                     equal ? "identical" : "DIFFER", bodies[0].size())};
}

}  // namespace

int main() {
  std::printf("calibrating lambda_c (d=2, r=1, side=30)...\n");
  const auto cal =
      percolation::calibrate_lambda_c(2, 1.0, 30.0, 400, kSeed + 99);
  std::printf("lambda_c ~ %.3f  [%.3f, %.3f]\n\n", cal.lambda_c, cal.ci_lo,
              cal.ci_hi);

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"Lemma 3.1 identity, d=1 closed form", criterion_detection_identity_1d},
      {"Lemma 3.1 oracle equivalence, d=2", criterion_detection_oracle_2d},
      {"sausage d=1 closed form + dt refinement", criterion_sausage_closed_form},
      {"t=0 ball volumes, d=1,2,3", criterion_initial_ball},
      {"stay-put dominance, d=1", criterion_stay_put},
      {"component partition vs BFS oracle", criterion_component_oracle},
      {"T_cov(point) == stationary T_det (KS)", criterion_cover_point_reduction},
      {"coverage growth, d=3 cube + segment ratio", criterion_coverage_growth},
      {"cantor box-counting dimension", criterion_cantor_dimension},
      {"coupling success, subset, Poisson moments", criterion_coupling},
      {"psi lower bound quadrature grid", criterion_psi_bound},
      {"density fraction at desk parameters", criterion_density},
      {"percolation proxy at 2 lambda_c",
       [&] { return criterion_perc_tail(cal.lambda_c); }},
      {"broadcast, sublinear + giant overlap",
       [&] { return criterion_broadcast(cal.lambda_c); }},
      {"byte-identical CSV across thread counts", criterion_reproducibility},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%2zu/15] %s  %-45s (%.1fs)  %s\n", i + 1,
                out.pass ? "PASS" : "FAIL", criteria[i].name, secs,
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  std::printf("\n%d of 15 criteria passed\n", 15 - failures);
  return failures;
}
