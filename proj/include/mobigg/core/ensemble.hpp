#pragma once

#include <cstdint>
#include <vector>

#include "mobigg/core/domain.hpp"
#include "mobigg/core/geometry.hpp"
#include "mobigg/core/rng.hpp"

namespace mobigg::core {

/// A time slice of the point process. Each node carries its own substream so
/// its future motion is reproducible no matter how trials are scheduled.
struct NodeEnsemble {
  double time = 0.0;
  PointMatrix positions;            // N x d
  std::vector<Substream> streams;   // one per node

  std::size_t size() const { return streams.size(); }
  int dim() const { return static_cast<int>(positions.cols()); }
};

/// Poisson(lambda * vol(region)) nodes, i.i.d. uniform on region.
/// Deterministic given (config.seed, region).
NodeEnsemble sample_poisson_points(const SimConfig& config, const Box& region);

/// Advance every node by an independent N(0, dt) increment per coordinate.
/// Torus domains wrap coordinates modulo the side.
NodeEnsemble step_brownian(const SimConfig& config, const NodeEnsemble& ensemble,
                           double dt);

struct StationarityReport {
  double expected_mean = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double z_mean = 0.0;
  double z_variance = 0.0;
  std::size_t reps = 0;
  bool pass = false;
};

/// Evolve the process to time t and test probe-window counts against
/// Poisson(lambda * vol) moments at 3 sigma. The probe window is the
/// domain's observation cube; nodes are sampled on window + buffer.
/// Refuses to run when the buffer is too small for horizon t.
StationarityReport stationarity_check(const SimConfig& config, double t,
                                      std::size_t reps);

}  // namespace mobigg::core
