#include <doctest.h>

#include <cmath>

#include "mobigg/detection/detection.hpp"
#include "mobigg/core/stats.hpp"

using namespace mobigg;

namespace {

core::SimConfig config_1d(double lambda, double r, double dt, double horizon,
                          std::uint64_t seed) {
  core::SimConfig cfg;
  cfg.d = 1;
  cfg.lambda = lambda;
  cfg.r = r;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.domain = core::DomainSpec::boxed(1.0, core::required_buffer(r, horizon));
  return cfg;
}

}  // namespace

TEST_CASE("zero intensity never detects") {
  auto cfg = config_1d(0.0, 0.5, 1e-2, 1.0, 7);
  const auto curve =
      detection::simulate_detection(cfg, core::Trajectory::stationary(), 200);
  for (const double s : curve.survival) CHECK(s == 1.0);
}

TEST_CASE("survival at zero equals the single-ball exponential") {
  // d=2: exp(-lambda pi r^2) = exp(-pi) ~ 0.0432 at lambda = r = 1
  core::SimConfig cfg;
  cfg.d = 2;
  cfg.lambda = 1.0;
  cfg.r = 1.0;
  cfg.dt = 1e-2;
  cfg.horizon = 0.05;
  cfg.seed = 11;
  cfg.domain = core::DomainSpec::boxed(1.0, core::required_buffer(1.0, 0.05));
  const auto curve =
      detection::simulate_detection(cfg, core::Trajectory::stationary(), 4000);
  const double expected = std::exp(-M_PI);
  CHECK(expected == doctest::Approx(0.0432).epsilon(1e-3));
  CHECK(std::abs(curve.survival.front() - expected) <
        3.0 * core::binomial_std_error(expected, 4000));
}

TEST_CASE("d=1 tail matches the closed form through Lemma-style identity") {
  // exp(-lambda (sqrt(8t/pi) + 2r)) at t = 0.5
  auto cfg = config_1d(1.0, 0.5, 1e-3, 0.5, 13);
  const auto curve =
      detection::simulate_detection(cfg, core::Trajectory::stationary(), 4000);
  const double expected = std::exp(-(std::sqrt(8.0 * 0.5 / M_PI) + 1.0));
  CHECK(std::abs(curve.at(0.5) - expected) <
        3.0 * core::binomial_std_error(expected, 4000) + 0.01 * expected);
}

TEST_CASE("survival curves are non-increasing") {
  auto cfg = config_1d(1.0, 0.5, 1e-2, 1.0, 17);
  const auto curve =
      detection::simulate_detection(cfg, core::Trajectory::brownian(), 1500);
  for (std::size_t k = 1; k < curve.survival.size(); ++k)
    CHECK(curve.survival[k] <= curve.survival[k - 1]);
}

TEST_CASE("undersized buffers are refused") {
  auto cfg = config_1d(1.0, 0.5, 1e-2, 4.0, 3);
  cfg.domain = core::DomainSpec::boxed(1.0, 1.0);
  CHECK_THROWS_WITH_AS(
      detection::simulate_detection(cfg, core::Trajectory::stationary(), 10),
      doctest::Contains("buffer"), std::invalid_argument);
}

TEST_CASE("extra nodes only help detection (superposition coupling)") {
  // survival under lambda + extra is pointwise below survival under lambda,
  // checked with shared base randomness: the union path detects whenever the
  // base path does
  auto base_cfg = config_1d(0.7, 0.5, 1e-2, 1.0, 23);
  auto more_cfg = base_cfg;
  more_cfg.lambda = 1.4;
  const auto base = detection::simulate_detection(
      base_cfg, core::Trajectory::stationary(), 2500);
  const auto more = detection::simulate_detection(
      more_cfg, core::Trajectory::stationary(), 2500);
  const double se = std::sqrt(base.std_error_at(1.0) * base.std_error_at(1.0) +
                              more.std_error_at(1.0) * more.std_error_at(1.0));
  CHECK(more.at(1.0) <= base.at(1.0) + 3.0 * se);
}

TEST_CASE("formula crosscheck agrees for stationary d=1 targets") {
  auto cfg = config_1d(1.0, 0.5, 1e-3, 1.0, 31);
  const auto rep = detection::detection_formula_crosscheck(
      cfg, core::Trajectory::stationary(), 1.0, 4000, 4000);
  CHECK(rep.pass);
  const double exact = std::exp(-(std::sqrt(8.0 / M_PI) + 1.0));
  CHECK(exact == doctest::Approx(0.0746).epsilon(2e-3));
  CHECK(std::abs(rep.formula_survival - exact) < 0.01);
}

TEST_CASE("formula crosscheck agrees for stationary d=2 targets") {
  core::SimConfig cfg;
  cfg.d = 2;
  cfg.lambda = 0.5;
  cfg.r = 0.8;
  cfg.dt = 2e-3;
  cfg.horizon = 0.5;
  cfg.seed = 37;
  cfg.domain = core::DomainSpec::boxed(1.0, core::required_buffer(0.8, 0.5));
  const auto rep = detection::detection_formula_crosscheck(
      cfg, core::Trajectory::stationary(), 0.5, 3000, 2000);
  CHECK(rep.pass);
}

TEST_CASE("formula crosscheck handles the moving-target identity") {
  // Brownian target: survival = E exp(-lambda E[vol | g])
  auto cfg = config_1d(1.0, 0.5, 2e-3, 0.5, 41);
  const auto rep = detection::detection_formula_crosscheck(
      cfg, core::Trajectory::brownian(), 0.5, 3000, 2000);
  CHECK(rep.pass);
}

TEST_CASE("lambda = 0 makes both crosscheck sides exactly one") {
  auto cfg = config_1d(0.0, 0.5, 1e-2, 0.2, 43);
  const auto rep = detection::detection_formula_crosscheck(
      cfg, core::Trajectory::stationary(), 0.2, 50, 50);
  CHECK(rep.direct_survival == 1.0);
  CHECK(rep.formula_survival == doctest::Approx(1.0));
  CHECK(rep.pass);
}

TEST_CASE("compact detection of a point matches plain detection") {
  auto cfg = config_1d(1.0, 0.5, 2e-3, 0.5, 47);
  const auto point = coverage::build_target(coverage::TargetKind::Point, 1, 1.0, 0.05);
  const auto compact = detection::compact_detection_tail(point, cfg, 2500);
  const auto plain =
      detection::simulate_detection(cfg, core::Trajectory::stationary(), 2500);
  const double se =
      std::sqrt(compact.std_error_at(0.5) * compact.std_error_at(0.5) +
                plain.std_error_at(0.5) * plain.std_error_at(0.5));
  CHECK(std::abs(compact.at(0.5) - plain.at(0.5)) <= 3.0 * se);
}

TEST_CASE("compact detection of a ball starts at the enlarged-ball mass") {
  // survival(0) = exp(-lambda v_d (R + r)^d)
  core::SimConfig cfg;
  cfg.d = 2;
  cfg.lambda = 0.2;
  cfg.r = 0.5;
  cfg.dt = 1e-2;
  cfg.horizon = 0.05;
  cfg.seed = 53;
  cfg.domain = core::DomainSpec::boxed(1.0, core::required_buffer(0.5, 0.05));
  // net for B(0, 1): grid restricted to the ball
  const auto cube = coverage::build_target(coverage::TargetKind::Cube, 2, 2.0, 0.04);
  std::vector<Eigen::Vector2d> inside;
  for (std::size_t i = 0; i < cube.size(); ++i)
    if (cube.points.row(static_cast<Eigen::Index>(i)).norm() <= 1.0)
      inside.push_back(cube.points.row(static_cast<Eigen::Index>(i)));
  core::PointMatrix pts(static_cast<Eigen::Index>(inside.size()), 2);
  for (std::size_t i = 0; i < inside.size(); ++i)
    pts.row(static_cast<Eigen::Index>(i)) = inside[i];
  const auto ball = coverage::custom_target(std::move(pts), 0.04);

  const auto curve = detection::compact_detection_tail(ball, cfg, 4000);
  const double expected = std::exp(-0.2 * M_PI * 1.5 * 1.5);
  CHECK(std::abs(curve.survival.front() - expected) <
        3.0 * core::binomial_std_error(expected, 4000) + 0.01);
}

TEST_CASE("staying put is optimal in one dimension") {
  auto cfg = config_1d(1.0, 0.5, 2e-3, 1.0, 59);
  const auto rep = detection::stay_put_comparison(cfg, {0.5, 1.0}, 2500);
  CHECK(rep.asserted);
  CHECK(rep.pass);
  // the true gap at t=1 is large: exp(-2.5958) vs exp(-3.2573)
  CHECK(rep.margin_brownian.back() > 0.0);
}

TEST_CASE("identical targets give identical curves under shared randomness") {
  // degenerate comparison: the linear target with zero speed is stationary
  core::SimConfig cfg = config_1d(1.0, 0.5, 5e-3, 0.5, 61);
  core::Point zero = core::Point::Zero(1);
  const auto rep = detection::stay_put_comparison(cfg, {0.5}, 400);
  // stationary vs linear(speed 1) differ; but stationary margins against
  // itself are exactly zero by construction of the shared-trial coupling
  const auto trials_a =
      detection::detection_trials(cfg, core::Trajectory::stationary(), 300);
  const auto trials_b =
      detection::detection_trials(cfg, core::Trajectory::stationary(), 300);
  for (std::size_t i = 0; i < trials_a.size(); ++i) {
    CHECK(trials_a[i].censored == trials_b[i].censored);
    if (trials_a[i].detected_at)
      CHECK(*trials_a[i].detected_at == *trials_b[i].detected_at);
  }
  (void)rep;
  (void)zero;
}

TEST_CASE("d=2 comparison reports without asserting") {
  core::SimConfig cfg;
  cfg.d = 2;
  cfg.lambda = 0.5;
  cfg.r = 0.8;
  cfg.dt = 5e-3;
  cfg.horizon = 0.5;
  cfg.seed = 67;
  cfg.domain = core::DomainSpec::boxed(1.0, core::required_buffer(0.8, 0.5));
  const auto rep = detection::stay_put_comparison(cfg, {0.5}, 500);
  CHECK_FALSE(rep.asserted);
  CHECK(rep.pass);  // no assertion made, so it cannot fail
}

TEST_CASE("halving dt moves survival by less than a combined sigma") {
  auto coarse_cfg = config_1d(1.0, 0.5, 2e-3, 0.5, 71);
  auto fine_cfg = coarse_cfg;
  fine_cfg.dt = 1e-3;
  const auto coarse = detection::simulate_detection(
      coarse_cfg, core::Trajectory::stationary(), 4000);
  const auto fine = detection::simulate_detection(
      fine_cfg, core::Trajectory::stationary(), 4000);
  const double se =
      std::sqrt(coarse.std_error_at(0.5) * coarse.std_error_at(0.5) +
                fine.std_error_at(0.5) * fine.std_error_at(0.5));
  CHECK(std::abs(coarse.at(0.5) - fine.at(0.5)) < 1.0 * se + 0.004);
}
