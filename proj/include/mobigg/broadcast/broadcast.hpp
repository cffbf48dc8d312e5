#pragma once

#include <cstdint>
#include <vector>

#include "mobigg/core/stats.hpp"

namespace mobigg::broadcast {

struct BroadcastTrial {
  int t_broad = -1;  // -1 while censored
  bool censored = false;
  std::size_t node_count = 0;
  std::size_t resamples = 0;       // empty-torus redraws
  std::size_t overlap_checks = 0;  // consecutive-step giant pairs seen
  std::size_t overlap_hits = 0;    // pairs sharing at least one node
};

struct BroadcastSample {
  std::vector<BroadcastTrial> trials;
  double median = 0.0;  // over uncensored trials
  std::size_t censored = 0;
  // consecutive-step giant-component overlap diagnostics, pooled
  std::size_t overlap_checks = 0;
  std::size_t overlap_hits = 0;
};

/// Broadcast on the torus of volume n/lambda: a message starts at the node
/// nearest the torus center and, at each integer step, reaches every node in
/// a component containing an informed node (step 0 included). Nodes move by
/// Brownian motion between steps (10 wrap sub-steps per unit time).
/// Refuses when lambda is not safely above the calibrated critical intensity.
BroadcastSample simulate_broadcast(double n, double lambda, double r, int d,
                                   std::size_t trials, int max_steps,
                                   std::uint64_t seed, double lambda_c,
                                   double margin = 0.1, unsigned threads = 1);

struct BroadcastStudyRow {
  double n = 0.0;
  double median = 0.0;
  double median_se = 0.0;  // bootstrap
  std::size_t censored = 0;
};

struct BroadcastStudy {
  std::vector<BroadcastStudyRow> rows;
  core::LinearFit fit;          // median against log n
  bool sublinear_pass = false;  // median(4n) <= 2 median(n) + 3 sigma
  double overlap_fraction = 0.0;
};

/// Medians over a geometric list of n (>= 3 values) with a regression against
/// log n. Asserts only sub-linearity; the polylog constant is not asserted.
BroadcastStudy broadcast_scaling_study(const std::vector<double>& n_list,
                                       double lambda, double r, int d,
                                       std::size_t trials, int max_steps,
                                       std::uint64_t seed, double lambda_c,
                                       double margin = 0.1,
                                       unsigned threads = 1);

}  // namespace mobigg::broadcast
