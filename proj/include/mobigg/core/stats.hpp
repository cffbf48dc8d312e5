#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mobigg::core {

/// Streaming mean/variance (Welford) with a commutative, associative merge so
/// parallel aggregation is schedule-independent up to float rounding.
class RunningMoments {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningMoments& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) { *this = o; return; }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double delta = o.mean_ - mean_;
    const double nt = na + nb;
    m2_ += o.m2_ + delta * delta * na * nb / nt;
    mean_ += delta * nb / nt;
    n_ += o.n_;
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_dev() const { return std::sqrt(variance()); }
  double std_error() const {
    return n_ > 0 ? std_dev() / std::sqrt(static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline double binomial_std_error(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

/// Smallest deviation a with the Poisson Chernoff bound at (1 +/- a/mean)
/// below tail_prob. Lower side: P[P <= (1-e)m] <= exp(-m e^2 / 2).
/// Upper side: P[P >= (1+e)m] <= exp(-m e^2 (1 - e/3) / 2).
inline double chernoff_poisson_threshold(double mean, double tail_prob,
                                         bool upper) {
  if (mean <= 0) throw std::invalid_argument("chernoff: mean must be > 0");
  if (tail_prob <= 0 || tail_prob > 1)
    throw std::invalid_argument("chernoff: tail_prob must be in (0, 1]");
  const double target = std::log(1.0 / tail_prob);
  if (target == 0.0) return 0.0;
  if (!upper) return std::sqrt(2.0 * mean * target);
  // invert m e^2 (1 - e/3) / 2 = target on e in (0, 1], where the bound is
  // stated and the exponent is increasing
  auto expo = [&](double e) { return 0.5 * mean * e * e * (1.0 - e / 3.0); };
  double lo = 0.0, hi = 1.0;
  if (expo(hi) < target)
    throw std::invalid_argument(
        "chernoff: tail_prob below the eps=1 upper bound exp(-mean/3)");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expo(mid) < target ? lo : hi) = mid;
  }
  return mean * 0.5 * (lo + hi);
}

/// Two-sample Kolmogorov-Smirnov distance between empirical distributions
/// given as sorted samples. Works on grid-valued (tied) data.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

/// KS acceptance threshold at two-sided significance alpha.
inline double ks_threshold(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt((static_cast<double>(n) + static_cast<double>(m)) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i];
    sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
  }
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  LinearFit f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r_squared = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

inline double sample_correlation(const std::vector<double>& x,
                                 const std::vector<double>& y) {
  LinearFit f = linear_fit(x, y);
  return f.slope >= 0 ? std::sqrt(f.r_squared) : -std::sqrt(f.r_squared);
}

/// z-score of a sample variance against a Poisson null with the given mean.
inline double poisson_variance_z(double sample_var, double mean, std::size_t n) {
  const double se = std::sqrt((mean + 2.0 * mean * mean) / static_cast<double>(n));
  return (sample_var - mean) / se;
}

}  // namespace mobigg::core
