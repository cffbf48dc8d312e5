#include "mobigg/core/ensemble.hpp"

#include <cmath>
#include <stdexcept>

namespace mobigg::core {

namespace {
constexpr std::uint64_t kCountTag = 0xC0117ED5ULL;
constexpr std::uint64_t kNodeTag = 0x90DE5EEDULL;
}  // namespace

NodeEnsemble sample_poisson_points(const SimConfig& config, const Box& region) {
  config.validate();
  if (region.dim() != config.d)
    throw std::invalid_argument("sample_poisson_points: region dim mismatch");
  const double vol = region.volume();
  if (vol <= 0.0)
    throw std::invalid_argument("sample_poisson_points: region has non-positive volume");

  NodeEnsemble out;
  out.time = 0.0;

  Substream count_stream(config.seed, kCountTag, 0);
  const std::uint64_t n = count_stream.next_poisson(config.lambda * vol);

  out.positions.resize(static_cast<Eigen::Index>(n), config.d);
  out.streams.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Substream s(config.seed, kNodeTag, i);
    for (int k = 0; k < config.d; ++k)
      out.positions(static_cast<Eigen::Index>(i), k) =
          s.next_uniform(region.lo[k], region.hi[k]);
    out.streams.push_back(s);
  }
  return out;
}

NodeEnsemble step_brownian(const SimConfig& config, const NodeEnsemble& ensemble,
                           double dt) {
  if (dt <= 0) throw std::invalid_argument("step_brownian: dt must be > 0");
  NodeEnsemble out = ensemble;
  const double scale = std::sqrt(dt);
  const bool wrap = config.domain.kind == DomainKind::Torus;
  const double side = config.domain.side;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& stream = out.streams[i];
    for (int k = 0; k < out.dim(); ++k) {
      double x = out.positions(static_cast<Eigen::Index>(i), k) +
                 scale * stream.next_normal();
      if (wrap) x = torus_wrap(x, side);
      out.positions(static_cast<Eigen::Index>(i), k) = x;
    }
  }
  out.time += dt;
  return out;
}

StationarityReport stationarity_check(const SimConfig& config, double t,
                                      std::size_t reps) {
  config.validate();
  if (config.domain.kind != DomainKind::BoxedPlane)
    throw std::invalid_argument("stationarity_check: needs a BoxedPlane domain");
  if (reps < 2) throw std::invalid_argument("stationarity_check: reps >= 2");

  const double needed =
      config.r + 4.0 * std::sqrt(t * std::log(static_cast<double>(reps) * 1e6));
  if (config.domain.buffer < needed)
    throw std::invalid_argument(
        "stationarity_check: buffer too small for horizon t, counts would be "
        "biased near the window edge");

  const Box probe = Box::centered_cube(config.d, config.domain.side);
  const Box sample_region = probe.inflated(config.domain.buffer);
  const double mean = config.lambda * probe.volume();

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    SimConfig rep_cfg = config;
    rep_cfg.seed = substream_key(config.seed, rep, 0x57A7ULL);
    NodeEnsemble nodes = sample_poisson_points(rep_cfg, sample_region);
    if (t > 0) nodes = step_brownian(rep_cfg, nodes, t);
    std::size_t count = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (probe.contains(nodes.positions.row(static_cast<Eigen::Index>(i))))
        ++count;
    sum += static_cast<double>(count);
    sum_sq += static_cast<double>(count) * static_cast<double>(count);
  }

  StationarityReport rep;
  rep.reps = reps;
  rep.expected_mean = mean;
  rep.sample_mean = sum / static_cast<double>(reps);
  rep.sample_variance =
      (sum_sq - sum * sum / static_cast<double>(reps)) /
      static_cast<double>(reps - 1);
  rep.z_mean = (rep.sample_mean - mean) /
               std::sqrt(mean / static_cast<double>(reps));
  // Var(S^2) for Poisson counts ~ (mean + 2 mean^2)/reps.
  rep.z_variance = (rep.sample_variance - mean) /
                   std::sqrt((mean + 2.0 * mean * mean) /
                             static_cast<double>(reps));
  rep.pass = std::abs(rep.z_mean) <= 3.0 && std::abs(rep.z_variance) <= 3.0;
  return rep;
}

}  // namespace mobigg::core
