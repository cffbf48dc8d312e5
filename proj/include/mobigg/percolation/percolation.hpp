#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mobigg/core/domain.hpp"
#include "mobigg/core/ensemble.hpp"
#include "mobigg/core/tail.hpp"

namespace mobigg::percolation {

// ---------------------------------------------------------------- calibration

struct LambdaCalibration {
  double lambda_c = 0.0;  // intensity with crossing probability 1/2
  double ci_lo = 0.0;     // bootstrap 99% interval
  double ci_hi = 0.0;
  double side = 0.0;
  int d = 0;
  double r = 0.0;
  std::size_t trials_per_probe = 0;
};

/// Probability that Q_side has a crossing component at intensity lambda
/// (time-0 snapshot).
double crossing_probability(int d, double r, double side, double lambda,
                            std::size_t trials, std::uint64_t seed,
                            unsigned threads = 1);

/// Bisection on lambda for crossing probability 1/2, with a bootstrap
/// confidence interval from the final bracket probes.
LambdaCalibration calibrate_lambda_c(int d, double r, double side,
                                     std::size_t trials, std::uint64_t seed,
                                     unsigned threads = 1);

/// Process-wide write-once cache keyed by (d, r, side, trials, seed).
const LambdaCalibration& calibrate_lambda_c_cached(int d, double r, double side,
                                                   std::size_t trials,
                                                   std::uint64_t seed);

// ----------------------------------------------------------------- perc tail

struct PercTrial {
  std::optional<int> perc_at;  // integer time
  bool censored = false;
};

struct PercTailResult {
  core::TailCurve curve;  // integer grid
  std::vector<PercTrial> trials;
};

/// Tail of the percolation-time proxy: first integer time at which the tagged
/// point is within r of a crossing component of Q_L. The tagged point is
/// stationary at the origin or an independent Brownian motion observed at
/// integer times. Refuses when lambda is not safely above the calibrated
/// critical intensity, or when the buffer violates the core rule.
PercTailResult estimate_perc_tail(const core::SimConfig& config, double L,
                                  std::size_t trials, int horizon,
                                  const core::Trajectory& target,
                                  double lambda_c, double margin = 0.1,
                                  unsigned threads = 1);

// -------------------------------------------------------------------- density

struct Tessellation {
  double cube_side = 0.0;      // K
  double cell_side = 0.0;      // ell
  double xi = 0.0;             // in (0, 1)
  std::size_t threshold = 0;   // ceil((1 - xi) lambda ell^d)

  static Tessellation make(int d, double cube_side, double cell_side, double xi,
                           double lambda);
  std::size_t cells_per_axis() const;
};

struct DensityReport {
  double fraction = 0.0;                 // dense steps / (t + 1)
  std::vector<std::size_t> min_occupancy;  // per integer time
  std::vector<bool> dense;                 // per integer time
  bool slack_warning = false;  // Chernoff slack of the threshold is thin
};

/// Fraction of integer times 0..t at which every cell of the tessellated
/// cube holds at least the threshold count.
DensityReport density_fraction(const core::SimConfig& config,
                               const Tessellation& tess, int t);

// ------------------------------------------------------------------- coupling

struct CouplingSpec {
  int d = 2;
  double K = 0.0;        // outer cube side
  double K_prime = 0.0;  // inner cube side
  double ell = 0.0;      // cell side
  double beta = 0.0;     // guaranteed per-unit-volume density of Phi_0
  double eps = 0.0;      // in (0, 1)
  double Delta = 0.0;    // coupling time

  double rho() const { return std::sqrt(static_cast<double>(d)) * ell; }
  /// Lemma-derived separation rule: R = 2 sqrt(d Delta log(8 d / eps)),
  /// K' <= K - 2R.
  double separation_radius() const;
  void validate() const;
};

struct CouplingResult {
  core::NodeEnsemble xi;         // fresh process on Q_{K'}, at time Delta
  core::NodeEnsemble phi_delta;  // all Phi_0 nodes moved to time Delta
  bool success = false;          // stage-(i) per-cell domination held

  // diagnostics
  double psi = 0.0;        // 1 - integral of g over R^d
  double ball_mass = 0.0;  // integral of g over B(0, (K - K')/2)
  double mu_lower = 0.0;   // survivor intensity lower bound on Q_{K'}
  double acceptance = 0.0; // stage-(iii) thinning acceptance
  std::size_t xi0_count = 0;
  std::size_t paired = 0;
  std::size_t jointly_moved = 0;
  std::size_t pair_thinned = 0;
};

/// Three-stage coupling: a fresh Poisson((1-eps/2) beta) process is dominated
/// cell-by-cell by Phi_0, paired nodes move together with probability
/// 1 - psi using the shifted-Gaussian density g, and the survivors inside
/// Q_{K'} are thinned to intensity (1-eps) beta. On success every node of xi
/// coincides bitwise with a node of phi_delta.
CouplingResult run_coupling(const CouplingSpec& spec,
                            const core::NodeEnsemble& phi0, std::uint64_t seed);

// --------------------------------------------------------------- psi bound

/// g(z) = (2 pi Delta)^{-d/2} exp(-(|z| + rho)^2 / (2 Delta)).
double g_ball_mass(int d, double rho, double Delta, double R);
double g_total_mass(int d, double rho, double Delta);

struct PsiBoundReport {
  bool applicable = false;  // hypotheses Delta >= 16 d^2 rho^2/eps^2 and
                            // R >= 2 sqrt(d Delta log(8 d / eps))
  double integral = 0.0;
  bool pass = false;  // integral >= 1 - eps/2 (asserted only when applicable)
};

PsiBoundReport check_psi_bound(int d, double eps, double rho, double Delta,
                               double R);

}  // namespace mobigg::percolation
