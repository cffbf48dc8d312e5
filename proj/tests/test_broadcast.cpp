#include <doctest.h>

#include <cmath>

#include "mobigg/broadcast/broadcast.hpp"

using namespace mobigg;

TEST_CASE("a single node broadcasts instantly") {
  // n tiny enough that most draws have one node; resamples skip empty ones
  const auto sample = broadcast::simulate_broadcast(0.05, 5.0, 1.0, 2, 30, 10,
                                                    910, 0.0, 0.0);
  for (const auto& t : sample.trials) {
    CHECK_FALSE(t.censored);
    if (t.node_count == 1) CHECK(t.t_broad == 0);
  }
}

TEST_CASE("an initially connected graph broadcasts at step zero") {
  // very dense supercritical torus: one component at step 0
  const auto sample =
      broadcast::simulate_broadcast(400.0, 10.0, 1.5, 2, 25, 10, 911, 1.44);
  std::size_t zero_steps = 0;
  for (const auto& t : sample.trials) {
    CHECK_FALSE(t.censored);
    if (t.t_broad == 0) ++zero_steps;
  }
  CHECK(zero_steps == 25);
}

TEST_CASE("broadcast refuses subcritical intensities") {
  CHECK_THROWS_WITH_AS(
      broadcast::simulate_broadcast(500.0, 1.0, 1.0, 2, 5, 10, 912, 1.44),
      doctest::Contains("critical"), std::invalid_argument);
}

TEST_CASE("moderately supercritical runs finish and overlap giants") {
  const double lambda_c = 1.44;
  const auto sample = broadcast::simulate_broadcast(500.0, 2.0 * lambda_c, 1.0,
                                                    2, 40, 120, 913, lambda_c);
  CHECK(sample.censored == 0);
  CHECK(sample.median >= 0.0);
  if (sample.overlap_checks > 10) {
    const double frac = static_cast<double>(sample.overlap_hits) /
                        static_cast<double>(sample.overlap_checks);
    CHECK(frac > 0.9);
  }
}

TEST_CASE("denser graphs broadcast no slower") {
  const double lambda_c = 1.44;
  const auto slow = broadcast::simulate_broadcast(400.0, 1.6 * lambda_c, 1.0, 2,
                                                  30, 150, 914, lambda_c);
  const auto fast = broadcast::simulate_broadcast(400.0, 4.0 * lambda_c, 1.0, 2,
                                                  30, 150, 915, lambda_c);
  CHECK(fast.median <= slow.median + 1.0);
}

TEST_CASE("scaling study checks its inputs and reports sublinearity") {
  const double lambda_c = 1.44;
  CHECK_THROWS_AS(
      broadcast::broadcast_scaling_study({100.0, 400.0}, 3.0, 1.0, 2, 5, 50,
                                         916, lambda_c),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broadcast::broadcast_scaling_study({100.0, 400.0, 900.0}, 3.0, 1.0, 2, 5,
                                         50, 917, lambda_c),
      std::invalid_argument);

  const auto study = broadcast::broadcast_scaling_study(
      {60.0, 240.0, 960.0}, 3.0, 1.0, 2, 25, 150, 918, lambda_c);
  CHECK(study.rows.size() == 3);
  for (const auto& row : study.rows) CHECK(row.censored == 0);
  CHECK(study.sublinear_pass);
}
