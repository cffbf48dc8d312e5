#include "mobigg/percolation/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "mobigg/core/cloud.hpp"
#include "mobigg/core/parallel.hpp"
#include "mobigg/core/quadrature.hpp"
#include "mobigg/core/rng.hpp"
#include "mobigg/graph/geometric_graph.hpp"

namespace mobigg::percolation {

namespace {

constexpr std::uint64_t kTrialTag = 0x9E2CULL;
constexpr std::uint64_t kTargetTag = 0x7A26E7ULL;
constexpr std::uint64_t kCountTag = 0xC27CULL;
constexpr std::uint64_t kNodeTag = 0x90DEULL;
constexpr std::uint64_t kXiCountTag = 0x41C0ULL;
constexpr std::uint64_t kXiNodeTag = 0x41DEULL;
constexpr std::uint64_t kBootTag = 0xB007ULL;

core::PointMatrix to_matrix(const std::vector<double>& flat, int d) {
  const auto n = static_cast<Eigen::Index>(flat.size() / d);
  core::PointMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) m(i, k) = flat[static_cast<std::size_t>(i) * d + k];
  return m;
}

}  // namespace

// ---------------------------------------------------------------- calibration

double crossing_probability(int d, double r, double side, double lambda,
                            std::size_t trials, std::uint64_t seed,
                            unsigned threads) {
  if (trials == 0) throw std::invalid_argument("crossing_probability: trials >= 1");
  if (lambda <= 0) return 0.0;
  const core::Box cube = core::Box::centered_cube(d, side);
  std::vector<std::uint8_t> crossed(trials, 0);
  core::parallel_for(trials, threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed = core::substream_key(seed, trial, kTrialTag);
    core::Substream count_stream(trial_seed, kCountTag, 0);
    const std::uint64_t n = count_stream.next_poisson(lambda * cube.volume());
    core::PointMatrix pos(static_cast<Eigen::Index>(n), d);
    for (std::uint64_t i = 0; i < n; ++i) {
      core::Substream s(trial_seed, kNodeTag, i);
      for (int k = 0; k < d; ++k)
        pos(static_cast<Eigen::Index>(i), k) = s.next_uniform(cube.lo[k], cube.hi[k]);
    }
    const graph::GeometricGraph g(std::move(pos), r);
    if (graph::crossing_component(g, side).exists) crossed[trial] = 1;
  });
  std::size_t hits = 0;
  for (const auto c : crossed) hits += c;
  return static_cast<double>(hits) / static_cast<double>(trials);
}

LambdaCalibration calibrate_lambda_c(int d, double r, double side,
                                     std::size_t trials, std::uint64_t seed,
                                     unsigned threads) {
  if (d < 2 || d > 3)
    throw std::invalid_argument("calibrate_lambda_c: d must be 2 or 3");
  if (trials < 20) throw std::invalid_argument("calibrate_lambda_c: trials >= 20");

  double guess = 1.5 / (core::unit_ball_volume(d) * std::pow(r, d));
  double lo = guess, hi = guess;
  std::uint64_t probe = 0;
  auto p_at = [&](double lambda) {
    return crossing_probability(d, r, side, lambda, trials,
                                core::substream_key(seed, probe++, 0xCA11ULL),
                                threads);
  };
  for (int it = 0; it < 24 && p_at(lo) >= 0.5; ++it) lo /= 2.0;
  for (int it = 0; it < 24 && p_at(hi) < 0.5; ++it) hi *= 2.0;
  for (int it = 0; it < 10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p_at(mid) < 0.5 ? lo : hi) = mid;
  }

  LambdaCalibration cal;
  cal.d = d;
  cal.r = r;
  cal.side = side;
  cal.trials_per_probe = trials;
  cal.lambda_c = 0.5 * (lo + hi);

  // the bisection bracket is narrower than the binomial noise, so the
  // interval comes from two wide flanking probes and a bootstrap of the
  // linear inversion between them
  const double flank_lo = cal.lambda_c * 0.92;
  const double flank_hi = cal.lambda_c * 1.08;
  const double p_lo = p_at(flank_lo);
  const double p_hi = p_at(flank_hi);
  auto invert = [&](double plo, double phi) {
    if (phi - plo < 1e-9) return cal.lambda_c;
    return flank_lo + (0.5 - plo) / (phi - plo) * (flank_hi - flank_lo);
  };

  const std::size_t B = 1000;
  std::vector<double> boot(B);
  core::Substream bs(seed, kBootTag, 0);
  auto binom = [&](double p) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < trials; ++i)
      if (bs.next_unit() < p) ++k;
    return static_cast<double>(k) / static_cast<double>(trials);
  };
  for (std::size_t b = 0; b < B; ++b)
    boot[b] = invert(binom(p_lo), binom(p_hi));
  std::sort(boot.begin(), boot.end());
  cal.ci_lo = std::min(boot[static_cast<std::size_t>(0.005 * B)], cal.lambda_c);
  cal.ci_hi = std::max(boot[static_cast<std::size_t>(0.995 * (B - 1))], cal.lambda_c);
  return cal;
}

const LambdaCalibration& calibrate_lambda_c_cached(int d, double r, double side,
                                                   std::size_t trials,
                                                   std::uint64_t seed) {
  using Key = std::tuple<int, double, double, std::size_t, std::uint64_t>;
  static std::map<Key, LambdaCalibration> cache;
  static std::mutex mutex;
  const Key key{d, r, side, trials, seed};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, calibrate_lambda_c(d, r, side, trials, seed)).first;
  return it->second;
}

// ----------------------------------------------------------------- perc tail

PercTailResult estimate_perc_tail(const core::SimConfig& config, double L,
                                  std::size_t trials, int horizon,
                                  const core::Trajectory& target,
                                  double lambda_c, double margin,
                                  unsigned threads) {
  config.validate();
  if (config.domain.kind != core::DomainKind::BoxedPlane)
    throw std::invalid_argument("estimate_perc_tail: BoxedPlane domains only");
  if (horizon < 0) throw std::invalid_argument("estimate_perc_tail: horizon >= 0");
  if (target.kind == core::Trajectory::Kind::Deterministic)
    throw std::invalid_argument(
        "estimate_perc_tail: tagged point is stationary or Brownian");
  if (config.lambda < lambda_c * (1.0 + margin))
    throw std::invalid_argument(
        "estimate_perc_tail: lambda is not safely above the calibrated "
        "critical intensity; the crossing-component proxy is meaningless in "
        "the subcritical regime");
  const double needed =
      core::required_buffer(config.r, static_cast<double>(horizon));
  if (config.domain.buffer < needed)
    throw std::invalid_argument("estimate_perc_tail: buffer below the core rule");

  const int d = config.d;
  const core::Box cube = core::Box::centered_cube(d, L);
  const core::Box region = cube.inflated(config.domain.buffer);

  PercTailResult result;
  result.trials.resize(trials);
  std::vector<double> event_times(trials, -1.0);

  core::parallel_for(trials, threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed =
        core::substream_key(config.seed, trial, kTrialTag);

    // tagged point at integer times
    std::vector<double> u((static_cast<std::size_t>(horizon) + 1) * d, 0.0);
    if (target.kind == core::Trajectory::Kind::Brownian) {
      core::Substream s(trial_seed, kTargetTag, 0);
      for (int k = 1; k <= horizon; ++k)
        for (int c = 0; c < d; ++c)
          u[static_cast<std::size_t>(k) * d + c] =
              u[static_cast<std::size_t>(k - 1) * d + c] + s.next_normal();
    }

    core::CloudConfig cloud;
    cloud.d = d;
    cloud.lambda = config.lambda;
    cloud.region = region;
    cloud.dt = 1.0;
    cloud.steps = static_cast<std::size_t>(horizon);
    cloud.deliver_radius = 0.0;
    cloud.seed = trial_seed;

    std::vector<double> inside;
    int perc_at = -1;
    core::run_brownian_cloud(
        cloud, [&](const double* x) { return cube.distance(x); },
        [&](std::uint32_t, const double* x) {
          inside.insert(inside.end(), x, x + d);
        },
        [&](std::size_t step) {
          const graph::GeometricGraph g(to_matrix(inside, d), config.r);
          inside.clear();
          const auto crossing = graph::crossing_component_ids(g, L);
          if (!crossing.empty()) {
            core::Point upos(d);
            for (int c = 0; c < d; ++c) upos[c] = u[step * d + c];
            for (const std::size_t node : g.nodes_near(upos, config.r)) {
              const int comp = g.component_of(node);
              if (std::find(crossing.begin(), crossing.end(), comp) !=
                  crossing.end()) {
                perc_at = static_cast<int>(step);
                return false;
              }
            }
          }
          return true;
        });

    if (perc_at >= 0) {
      result.trials[trial].perc_at = perc_at;
      event_times[trial] = static_cast<double>(perc_at);
    } else {
      result.trials[trial].censored = true;
    }
  });
  result.curve = core::tail_from_event_times(event_times, 1.0,
                                             static_cast<double>(horizon));
  return result;
}

// -------------------------------------------------------------------- density

Tessellation Tessellation::make(int d, double cube_side, double cell_side,
                                double xi, double lambda) {
  if (d < 1 || d > 4) throw std::invalid_argument("Tessellation: d in 1..4");
  if (cube_side <= 0 || cell_side <= 0 || cube_side < cell_side)
    throw std::invalid_argument("Tessellation: bad sides");
  const double ratio = cube_side / cell_side;
  if (std::abs(ratio - std::llround(ratio)) > 1e-9)
    throw std::invalid_argument("Tessellation: K/ell must be integral");
  if (xi <= 0 || xi >= 1) throw std::invalid_argument("Tessellation: xi in (0,1)");
  Tessellation t;
  t.cube_side = cube_side;
  t.cell_side = cell_side;
  t.xi = xi;
  t.threshold = static_cast<std::size_t>(std::ceil(
      (1.0 - xi) * lambda * std::pow(cell_side, static_cast<double>(d)) - 1e-12));
  if (t.threshold < 1)
    throw std::invalid_argument("Tessellation: threshold must be >= 1");
  return t;
}

std::size_t Tessellation::cells_per_axis() const {
  return static_cast<std::size_t>(std::llround(cube_side / cell_side));
}

DensityReport density_fraction(const core::SimConfig& config,
                               const Tessellation& tess, int t) {
  config.validate();
  if (config.domain.kind != core::DomainKind::BoxedPlane)
    throw std::invalid_argument("density_fraction: BoxedPlane domains only");
  if (t < 0) throw std::invalid_argument("density_fraction: t >= 0");
  const double needed = core::required_buffer(config.r, static_cast<double>(t));
  if (config.domain.buffer < needed)
    throw std::invalid_argument("density_fraction: buffer below the core rule");

  const int d = config.d;
  const double cell_mean =
      config.lambda * std::pow(tess.cell_side, static_cast<double>(d));
  const std::size_t threshold = tess.threshold;
  if (threshold < 1)
    throw std::invalid_argument("density_fraction: threshold must be >= 1");

  const std::size_t m = tess.cells_per_axis();
  std::size_t total_cells = 1;
  for (int k = 0; k < d; ++k) total_cells *= m;

  DensityReport report;
  // thin Chernoff slack makes the dense-step fraction a weak statistic
  const double per_cell_bound = std::exp(-cell_mean * tess.xi * tess.xi / 2.0);
  report.slack_warning =
      per_cell_bound * static_cast<double>(total_cells) *
          static_cast<double>(t + 1) > 0.5;

  const core::Box cube = core::Box::centered_cube(d, tess.cube_side);
  core::CloudConfig cloud;
  cloud.d = d;
  cloud.lambda = config.lambda;
  cloud.region = cube.inflated(config.domain.buffer);
  cloud.dt = 1.0;
  cloud.steps = static_cast<std::size_t>(t);
  cloud.deliver_radius = 0.0;
  cloud.seed = config.seed;

  std::vector<std::size_t> counts(total_cells, 0);
  std::size_t dense_steps = 0;
  core::run_brownian_cloud(
      cloud, [&](const double* x) { return cube.distance(x); },
      [&](std::uint32_t, const double* x) {
        std::size_t flat = 0;
        for (int k = d - 1; k >= 0; --k) {
          auto idx = static_cast<long long>(
              std::floor((x[k] + tess.cube_side / 2.0) / tess.cell_side));
          idx = std::clamp<long long>(idx, 0, static_cast<long long>(m) - 1);
          flat = flat * m + static_cast<std::size_t>(idx);
        }
        ++counts[flat];
      },
      [&](std::size_t) {
        const std::size_t min_count =
            *std::min_element(counts.begin(), counts.end());
        report.min_occupancy.push_back(min_count);
        const bool dense = min_count >= threshold;
        report.dense.push_back(dense);
        if (dense) ++dense_steps;
        std::fill(counts.begin(), counts.end(), 0);
        return true;
      });

  report.fraction =
      static_cast<double>(dense_steps) / static_cast<double>(t + 1);
  return report;
}

// --------------------------------------------------------------- psi bound

double g_ball_mass(int d, double rho, double Delta, double R) {
  if (d < 1 || d > 4) throw std::invalid_argument("g_ball_mass: d in 1..4");
  if (rho < 0 || Delta <= 0 || R < 0)
    throw std::invalid_argument("g_ball_mass: bad parameters");
  const double rt = rho / std::sqrt(Delta);
  const double umax = std::min(R / std::sqrt(Delta), std::max(40.0 - rt, 0.0));
  const auto f = [&](double u) {
    return std::pow(u, d - 1) * std::exp(-0.5 * (u + rt) * (u + rt));
  };
  // unit panels keep the adaptive rule from stepping over the Gaussian bump
  double body = 0.0;
  for (double a = 0.0; a < umax; a += 1.0)
    body += core::integrate(f, a, std::min(a + 1.0, umax), 1e-14);
  return core::unit_sphere_area(d) *
         std::pow(2.0 * M_PI, -static_cast<double>(d) / 2.0) * body;
}

double g_total_mass(int d, double rho, double Delta) {
  // integrand is negligible past |u + rho/sqrt(Delta)| ~ 40
  return g_ball_mass(d, rho, Delta, 40.0 * std::sqrt(Delta));
}

PsiBoundReport check_psi_bound(int d, double eps, double rho, double Delta,
                               double R) {
  PsiBoundReport rep;
  const bool hyp = eps > 0 && eps < 1 && rho > 0 &&
                   Delta >= 16.0 * d * d * rho * rho / (eps * eps) &&
                   R >= 2.0 * std::sqrt(d * Delta * std::log(8.0 * d / eps));
  rep.applicable = hyp;
  rep.integral = g_ball_mass(d, rho, Delta, R);
  rep.pass = hyp && rep.integral >= 1.0 - eps / 2.0;
  return rep;
}

// ------------------------------------------------------------------- coupling

double CouplingSpec::separation_radius() const {
  return 2.0 * std::sqrt(d * Delta * std::log(8.0 * d / eps));
}

void CouplingSpec::validate() const {
  if (d < 1 || d > 4) throw std::invalid_argument("CouplingSpec: d in 1..4");
  if (ell <= 0 || beta <= 0) throw std::invalid_argument("CouplingSpec: ell, beta > 0");
  if (eps <= 0 || eps >= 1) throw std::invalid_argument("CouplingSpec: eps in (0,1)");
  const double ratio = K / ell;
  if (K <= 0 || std::abs(ratio - std::llround(ratio)) > 1e-9)
    throw std::invalid_argument("CouplingSpec: K/ell must be integral");
  if (Delta < 16.0 * d * d * ell * ell / (eps * eps) - 1e-9)
    throw std::invalid_argument(
        "CouplingSpec: Delta below 16 d^2 ell^2 / eps^2");
  if (K_prime <= 0)
    throw std::invalid_argument("CouplingSpec: K' must be positive");
  if (K_prime > K - 2.0 * separation_radius() + 1e-9)
    throw std::invalid_argument(
        "CouplingSpec: K' exceeds K - 2R; the separation rule K' <= K - "
        "2 sqrt(d Delta log(8d/eps)) * 2 fails, so the survivor intensity "
        "cannot be guaranteed on Q_{K'}");
}

namespace {

// Inverse-CDF sampler for |Z| where Z ~ g / (1 - psi):
// density of the radius is proportional to u^{d-1} exp(-(u + rho~)^2 / 2).
class RadialSampler {
 public:
  RadialSampler(int d, double rho, double Delta) : sqrt_delta_(std::sqrt(Delta)) {
    const double rt = rho / sqrt_delta_;
    const double umax = rt + 40.0;
    const std::size_t n = 1 << 14;
    us_.resize(n + 1);
    cdf_.resize(n + 1);
    double acc = 0.0;
    double prev = 0.0;
    const auto f = [&](double u) {
      return std::pow(u, d - 1) * std::exp(-0.5 * (u + rt) * (u + rt));
    };
    for (std::size_t i = 0; i <= n; ++i) {
      const double u = umax * static_cast<double>(i) / static_cast<double>(n);
      const double fu = f(u);
      if (i > 0) acc += 0.5 * (prev + fu) * (umax / static_cast<double>(n));
      us_[i] = u;
      cdf_[i] = acc;
      prev = fu;
    }
    for (auto& c : cdf_) c /= acc;
  }

  double sample_radius(core::Substream& stream) const {
    const double u = stream.next_unit();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t hi = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(it - cdf_.begin(), 1), cdf_.size() - 1);
    const std::size_t lo = hi - 1;
    const double span = cdf_[hi] - cdf_[lo];
    const double t = span > 0 ? (u - cdf_[lo]) / span : 0.5;
    return (us_[lo] + t * (us_[hi] - us_[lo])) * sqrt_delta_;
  }

 private:
  double sqrt_delta_;
  std::vector<double> us_;
  std::vector<double> cdf_;
};

void sample_direction(int d, core::Substream& stream, double* dir) {
  switch (d) {
    case 1:
      dir[0] = stream.next_unit() < 0.5 ? -1.0 : 1.0;
      return;
    case 2: {
      const double theta = 2.0 * M_PI * stream.next_unit();
      dir[0] = std::cos(theta);
      dir[1] = std::sin(theta);
      return;
    }
    case 3: {
      const double z = 2.0 * stream.next_unit() - 1.0;
      const double phi = 2.0 * M_PI * stream.next_unit();
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      dir[0] = s * std::cos(phi);
      dir[1] = s * std::sin(phi);
      dir[2] = z;
      return;
    }
    default: {
      double norm_sq = 0.0;
      for (int k = 0; k < d; ++k) {
        dir[k] = stream.next_normal();
        norm_sq += dir[k] * dir[k];
      }
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (int k = 0; k < d; ++k) dir[k] *= inv;
      return;
    }
  }
}

}  // namespace

CouplingResult run_coupling(const CouplingSpec& spec,
                            const core::NodeEnsemble& phi0,
                            std::uint64_t seed) {
  spec.validate();
  const int d = spec.d;
  if (phi0.dim() != d) throw std::invalid_argument("run_coupling: dim mismatch");
  const auto m = static_cast<std::size_t>(std::llround(spec.K / spec.ell));
  std::size_t total_cells = 1;
  for (int k = 0; k < d; ++k) total_cells *= m;
  const double cell_volume = std::pow(spec.ell, d);
  const double required = spec.beta * cell_volume;

  auto cell_of = [&](const double* p) {
    std::size_t flat = 0;
    for (int k = d - 1; k >= 0; --k) {
      auto idx = static_cast<long long>(
          std::floor((p[k] + spec.K / 2.0) / spec.ell));
      idx = std::clamp<long long>(idx, 0, static_cast<long long>(m) - 1);
      flat = flat * m + static_cast<std::size_t>(idx);
    }
    return flat;
  };

  // Phi_0 must meet the per-cell density floor
  std::vector<std::vector<std::uint32_t>> phi_cells(total_cells);
  for (std::size_t i = 0; i < phi0.size(); ++i) {
    const double* p = phi0.positions.row(static_cast<Eigen::Index>(i)).data();
    if (!core::Box::centered_cube(d, spec.K).contains(
            phi0.positions.row(static_cast<Eigen::Index>(i)), 1e-9))
      throw std::invalid_argument("run_coupling: phi0 node outside Q_K");
    phi_cells[cell_of(p)].push_back(static_cast<std::uint32_t>(i));
  }
  for (const auto& cell : phi_cells)
    if (static_cast<double>(cell.size()) < required - 1e-9)
      throw std::invalid_argument(
          "run_coupling: phi0 has a cell below beta * ell^d nodes");

  CouplingResult result;
  const double rho = spec.rho();
  result.psi = 1.0 - g_total_mass(d, rho, spec.Delta);
  result.ball_mass = g_ball_mass(d, rho, spec.Delta, (spec.K - spec.K_prime) / 2.0);
  result.mu_lower = (1.0 - spec.eps / 2.0) * spec.beta * result.ball_mass;
  const double target_intensity = (1.0 - spec.eps) * spec.beta;
  result.acceptance = target_intensity / result.mu_lower;
  if (result.acceptance > 1.0)
    throw std::invalid_argument(
        "run_coupling: survivor intensity bound below (1-eps) beta; the "
        "separation between K and K' is too small for this Delta");

  // stage (i): fresh process at intensity (1 - eps/2) beta over Q_K
  const double xi0_intensity = (1.0 - spec.eps / 2.0) * spec.beta;
  core::Substream count_stream(seed, kXiCountTag, 0);
  const std::uint64_t n_xi0 =
      count_stream.next_poisson(xi0_intensity * std::pow(spec.K, d));
  result.xi0_count = n_xi0;

  std::vector<double> xi0_pos(static_cast<std::size_t>(n_xi0) * d);
  std::vector<core::Substream> xi0_streams;
  xi0_streams.reserve(n_xi0);
  std::vector<std::vector<std::uint32_t>> xi_cells(total_cells);
  for (std::uint64_t i = 0; i < n_xi0; ++i) {
    core::Substream s(seed, kXiNodeTag, i);
    for (int k = 0; k < d; ++k)
      xi0_pos[i * d + k] = s.next_uniform(-spec.K / 2.0, spec.K / 2.0);
    xi0_streams.push_back(s);
    xi_cells[cell_of(&xi0_pos[i * d])].push_back(static_cast<std::uint32_t>(i));
  }

  result.success = true;
  for (std::size_t c = 0; c < total_cells; ++c)
    if (xi_cells[c].size() > phi_cells[c].size()) result.success = false;

  // stage (ii): per-cell pairing, joint moves through g
  const RadialSampler radial(d, rho, spec.Delta);
  result.phi_delta = phi0;
  result.phi_delta.time = phi0.time + spec.Delta;
  const double sqrt_delta = std::sqrt(spec.Delta);

  std::vector<std::uint8_t> phi_paired(phi0.size(), 0);
  std::vector<double> xi_moved_pos;
  xi_moved_pos.reserve(static_cast<std::size_t>(n_xi0) * d);
  std::vector<std::uint32_t> xi_moved_idx;

  double dir[4];
  for (std::size_t c = 0; c < total_cells; ++c) {
    const std::size_t pairs = std::min(xi_cells[c].size(), phi_cells[c].size());
    result.paired += pairs;
    for (std::size_t j = 0; j < pairs; ++j) {
      const std::uint32_t xi_idx = xi_cells[c][j];
      const std::uint32_t phi_idx = phi_cells[c][j];
      phi_paired[phi_idx] = 1;
      auto& stream = xi0_streams[xi_idx];
      const double* y_prime = &xi0_pos[static_cast<std::size_t>(xi_idx) * d];
      auto phi_row = result.phi_delta.positions.row(phi_idx);
      if (stream.next_unit() < 1.0 - result.psi) {
        // joint move: both nodes land on y' + Z, bitwise equal
        const double radius = radial.sample_radius(stream);
        sample_direction(d, stream, dir);
        ++result.jointly_moved;
        xi_moved_idx.push_back(xi_idx);
        for (int k = 0; k < d; ++k) {
          const double coord = y_prime[k] + radius * dir[k];
          xi_moved_pos.push_back(coord);
          phi_row[k] = coord;
        }
      } else {
        // xi node thinned; the partner moves by the residual density so its
        // marginal stays exactly Brownian
        ++result.pair_thinned;
        const double* y = phi0.positions.row(phi_idx).data();
        core::Substream rs = phi0.streams[phi_idx];
        double candidate[4];
        for (;;) {
          double dist_sq = 0.0;
          for (int k = 0; k < d; ++k) {
            candidate[k] = y[k] + sqrt_delta * rs.next_normal();
            const double diff = candidate[k] - y[k];
            dist_sq += diff * diff;
          }
          double shift = 0.0;
          for (int k = 0; k < d; ++k) {
            const double diff = candidate[k] - y_prime[k];
            shift += diff * diff;
          }
          const double num = std::sqrt(shift) + rho;
          const double log_ratio =
              (dist_sq - num * num) / (2.0 * spec.Delta);
          if (rs.next_unit() >= std::exp(log_ratio)) break;
        }
        for (int k = 0; k < d; ++k) phi_row[k] = candidate[k];
      }
    }
  }

  // unpaired Phi_0 nodes move by plain Brownian displacement
  for (std::size_t i = 0; i < phi0.size(); ++i) {
    if (phi_paired[i]) continue;
    core::Substream rs = phi0.streams[i];
    auto row = result.phi_delta.positions.row(static_cast<Eigen::Index>(i));
    for (int k = 0; k < d; ++k) row[k] += sqrt_delta * rs.next_normal();
  }

  // stage (iii): thin survivors inside Q_{K'} down to (1 - eps) beta
  const double half_kp = spec.K_prime / 2.0;
  std::vector<double> xi_final;
  std::vector<core::Substream> xi_streams_final;
  for (std::size_t j = 0; j < xi_moved_idx.size(); ++j) {
    const double* p = &xi_moved_pos[j * d];
    bool inside = true;
    for (int k = 0; k < d; ++k)
      if (p[k] < -half_kp || p[k] > half_kp) inside = false;
    if (!inside) continue;
    auto& stream = xi0_streams[xi_moved_idx[j]];
    if (stream.next_unit() <= result.acceptance) {
      xi_final.insert(xi_final.end(), p, p + d);
      xi_streams_final.push_back(stream);
    }
  }
  result.xi.time = spec.Delta;
  result.xi.positions = to_matrix(xi_final, d);
  result.xi.streams = std::move(xi_streams_final);
  return result;
}

}  // namespace mobigg::percolation
