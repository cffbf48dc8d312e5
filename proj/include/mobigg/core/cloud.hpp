#pragma once

// Lazy evolution of a Poisson cloud on a buffered window.
//
// Modules that observe the process only inside a region of interest (cover
// targets, crossing cubes, tessellation cells) do not need fine-grained paths
// for nodes far away. A node at clearance y from the region cannot reach it
// within tau(y) = y^2 / (2 d ln(2d/delta)) except with probability delta per
// sleep (Brownian sup tail), so it takes one exact Gaussian block jump when
// it next wakes. delta = 1e-12 per wake keeps the total bias far below the
// window-truncation budget of the buffer rule.

#include <cstdint>
#include <vector>

#include "mobigg/core/geometry.hpp"
#include "mobigg/core/rng.hpp"

namespace mobigg::core {

struct CloudConfig {
  int d = 2;
  double lambda = 1.0;
  Box region;                  // birth window (observation region + buffer)
  double dt = 1.0;             // grid step duration
  std::size_t steps = 0;       // simulate grid times 0..steps
  double deliver_radius = 0.0; // nodes with distance <= this are delivered
  std::uint64_t seed = 0;
};

namespace cloud_detail {
constexpr double kSleepDelta = 1e-12;
constexpr std::uint64_t kCountTag = 0xC10DC057ULL;
constexpr std::uint64_t kNodeTag = 0xC10D50DEULL;
}  // namespace cloud_detail

/// Runs the cloud over grid times 0..cfg.steps.
///
/// distance_lb(pos) must return a lower bound on the distance from pos to the
/// current region of interest (which may only shrink over time).
/// visit(index, pos) is called, at every grid time, for every node within
/// deliver_radius of the region. end_of_step(step) runs after all wakes of
/// that step; returning false stops the run.
template <class DistanceFn, class VisitFn, class StepFn>
void run_brownian_cloud(const CloudConfig& cfg, DistanceFn&& distance_lb,
                        VisitFn&& visit, StepFn&& end_of_step) {
  const int d = cfg.d;
  const double sleep_denom =
      2.0 * d * std::log(2.0 * d / cloud_detail::kSleepDelta);

  Substream count_stream(cfg.seed, cloud_detail::kCountTag, 0);
  const std::uint64_t n =
      count_stream.next_poisson(cfg.lambda * cfg.region.volume());

  std::vector<double> pos(static_cast<std::size_t>(n) * d);
  std::vector<std::uint64_t> rng_ctr(n, 0);
  std::vector<std::uint32_t> last_step(n, 0);
  std::vector<std::vector<std::uint32_t>> bucket(cfg.steps + 1);

  for (std::uint64_t i = 0; i < n; ++i) {
    Substream s(cfg.seed, cloud_detail::kNodeTag, i);
    for (int k = 0; k < d; ++k)
      pos[i * d + k] = s.next_uniform(cfg.region.lo[k], cfg.region.hi[k]);
    rng_ctr[i] = s.counter();
  }
  if (n > 0) {
    bucket[0].reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i)
      bucket[0].push_back(static_cast<std::uint32_t>(i));
  }

  for (std::size_t step = 0; step <= cfg.steps; ++step) {
    for (const std::uint32_t i : bucket[step]) {
      double* p = &pos[static_cast<std::size_t>(i) * d];
      const std::size_t slept = step - last_step[i];
      if (slept > 0) {
        Substream s = Substream::resume(
            substream_key(cfg.seed, cloud_detail::kNodeTag, i), rng_ctr[i]);
        const double scale = std::sqrt(static_cast<double>(slept) * cfg.dt);
        for (int k = 0; k < d; ++k) p[k] += scale * s.next_normal();
        rng_ctr[i] = s.counter();
        last_step[i] = static_cast<std::uint32_t>(step);
      }

      double dist = distance_lb(p);
      if (dist <= cfg.deliver_radius) {
        visit(i, p);
        dist = distance_lb(p);
      }
      const double clearance = dist - cfg.deliver_radius;
      std::size_t sleep = 1;
      if (clearance > 0) {
        const double tau = clearance * clearance / sleep_denom;
        const double s = std::floor(tau / cfg.dt);
        const double horizon = static_cast<double>(cfg.steps) + 1.0;
        if (s >= horizon || std::isinf(dist))
          sleep = cfg.steps + 1;
        else if (s > 1.0)
          sleep = static_cast<std::size_t>(s);
      }
      const std::size_t next = step + sleep;
      if (next > step && next <= cfg.steps) bucket[next].push_back(i);
      // otherwise the node provably stays clear until the horizon: drop it
    }
    bucket[step].clear();
    bucket[step].shrink_to_fit();
    if (!end_of_step(step)) return;
  }
}

}  // namespace mobigg::core
