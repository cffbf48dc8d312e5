#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "mobigg/core/geometry.hpp"

namespace mobigg::core {

enum class DomainKind { BoxedPlane, Torus };

/// Simulation domain: either a finite observation window in R^d with a
/// sampling buffer around it, or a torus of given side.
struct DomainSpec {
  DomainKind kind = DomainKind::BoxedPlane;
  double side = 1.0;    // observation window / torus side
  double buffer = 0.0;  // extra sampling margin (BoxedPlane only)

  static DomainSpec boxed(double side, double buffer) {
    DomainSpec s;
    s.kind = DomainKind::BoxedPlane;
    s.side = side;
    s.buffer = buffer;
    s.validate();
    return s;
  }

  static DomainSpec torus(double side) {
    DomainSpec s;
    s.kind = DomainKind::Torus;
    s.side = side;
    s.validate();
    return s;
  }

  /// Torus sized so the expected node count at intensity lambda is n.
  static DomainSpec torus_for_nodes(double n, double lambda, int d) {
    if (n <= 0 || lambda <= 0) throw std::invalid_argument("torus_for_nodes");
    return torus(std::pow(n / lambda, 1.0 / d));
  }

  void validate() const {
    if (side <= 0) throw std::invalid_argument("DomainSpec: side must be > 0");
    if (buffer < 0) throw std::invalid_argument("DomainSpec: buffer must be >= 0");
    if (kind == DomainKind::Torus && buffer != 0)
      throw std::invalid_argument("DomainSpec: torus has no buffer");
  }
};

/// Buffer width that makes the truncation of the infinite volume harmless:
/// the chance that any omitted node influences the window within time t_max
/// is below delta (Gaussian tail bound, constant 4 chosen conservatively).
inline double required_buffer(double r, double t_max, double delta = 1e-6) {
  if (t_max <= 0) return r;
  return r + 4.0 * std::sqrt(t_max * std::log(1.0 / delta));
}

struct SimConfig {
  double lambda = 1.0;  // nodes per unit volume
  double r = 1.0;       // connection radius
  int d = 2;            // dimension
  double dt = 1e-2;     // time step
  double horizon = 1.0; // max simulated time
  DomainSpec domain;
  std::uint64_t seed = 0;

  void validate() const {
    if (lambda < 0) throw std::invalid_argument("SimConfig: lambda must be >= 0");
    if (r <= 0) throw std::invalid_argument("SimConfig: r must be > 0");
    if (d < 1 || d > 4) throw std::invalid_argument("SimConfig: d must be in {1,2,3,4}");
    if (dt <= 0) throw std::invalid_argument("SimConfig: dt must be > 0");
    if (horizon < 0) throw std::invalid_argument("SimConfig: horizon must be >= 0");
    if (horizon > 0 && dt > horizon)
      throw std::invalid_argument("SimConfig: dt must not exceed horizon");
    domain.validate();
  }

  std::size_t grid_steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
  }
};

/// Target motion. Deterministic targets supply g with g(0) = 0; Brownian
/// targets are realized per trial from their own substream.
struct Trajectory {
  enum class Kind { Stationary, Brownian, Deterministic };
  Kind kind = Kind::Stationary;
  std::function<Point(double)> path;  // Deterministic only

  static Trajectory stationary() { return {}; }

  static Trajectory brownian() {
    Trajectory t;
    t.kind = Kind::Brownian;
    return t;
  }

  static Trajectory deterministic(std::function<Point(double)> g) {
    Trajectory t;
    t.kind = Kind::Deterministic;
    t.path = std::move(g);
    return t;
  }

  /// Linear drift with the given velocity vector.
  static Trajectory linear(Point velocity) {
    return deterministic([v = std::move(velocity)](double s) -> Point {
      return v * s;
    });
  }

  /// Checks g(0) = 0 and continuity at the dt resolution: consecutive
  /// samples within cont_c * sqrt(dt).
  void validate(int d, double dt, double horizon, double cont_c = 16.0) const {
    if (kind != Kind::Deterministic) return;
    if (!path) throw std::invalid_argument("Trajectory: missing path");
    const Point origin = path(0.0);
    if (origin.size() != d) throw std::invalid_argument("Trajectory: dim mismatch");
    if (origin.norm() > 1e-12)
      throw std::invalid_argument("Trajectory: g(0) must be the origin");
    const double bound = cont_c * std::sqrt(dt);
    Point prev = origin;
    for (double s = dt; s <= horizon + 0.5 * dt; s += dt) {
      Point cur = path(s);
      if ((cur - prev).norm() > bound)
        throw std::invalid_argument("Trajectory: jump exceeds continuity bound");
      prev = std::move(cur);
    }
  }
};

}  // namespace mobigg::core
