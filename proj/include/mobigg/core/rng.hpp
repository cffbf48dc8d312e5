#pragma once

// Counter-based random streams. Every (master seed, trial, node) triple maps
// to its own substream, so trials can run on any schedule and still produce
// bit-identical output.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>

namespace mobigg::core {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t splitmix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  const __uint128_t p = static_cast<__uint128_t>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

// Ziggurat tables for the standard normal (Marsaglia-Tsang, 128 layers).
struct ZigguratTable {
  double x[129];
  double y[129];
  static constexpr double tail_x = 3.442619855899;
  static constexpr double layer_area = 9.91256303526217e-3;

  ZigguratTable() {
    const auto f = [](double v) { return std::exp(-0.5 * v * v); };
    x[128] = layer_area / f(tail_x);
    x[127] = tail_x;
    y[127] = f(tail_x);
    for (int i = 126; i >= 1; --i) {
      x[i] = std::sqrt(-2.0 * std::log(layer_area / x[i + 1] + f(x[i + 1])));
      y[i] = f(x[i]);
    }
    x[0] = 0.0;
    y[0] = 1.0;
  }
};

inline const ZigguratTable& ziggurat() {
  static const ZigguratTable table;
  return table;
}

}  // namespace detail

/// Derive a substream key from the master seed and up to two indices
/// (typically trial and node). Pure function of its arguments.
inline std::uint64_t substream_key(std::uint64_t master, std::uint64_t a = 0,
                                   std::uint64_t b = 0) {
  std::uint64_t h = detail::splitmix(master);
  h = detail::splitmix(h ^ (a + 0x8000000000000001ULL));
  h = detail::splitmix(h ^ (b + 0x2545F4914F6CDD1DULL));
  return h;
}

/// One independent random stream: Philox2x64-10 in counter mode.
class Substream {
 public:
  Substream() = default;
  explicit Substream(std::uint64_t key) : key_(key) {}
  Substream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0)
      : key_(substream_key(master, a, b)) {}

  /// Resume a stream from a saved (key, counter) pair. A word buffered at
  /// save time is dropped, deterministically.
  static Substream resume(std::uint64_t key, std::uint64_t counter) {
    Substream s(key);
    s.ctr_ = counter;
    return s;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return ctr_; }

  std::uint64_t next_u64() {
    if (buffered_) {
      buffered_ = false;
      return buffer_;
    }
    std::uint64_t x0 = ctr_++;
    std::uint64_t x1 = 0x5851F42D4C957F2DULL;
    std::uint64_t k = key_;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t hi, lo;
      detail::mulhilo(x0, kMul, hi, lo);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += detail::kGolden;
    }
    buffer_ = x1;
    buffered_ = true;
    return x0;
  }

  /// Uniform double in [0, 1).
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Standard normal via ziggurat.
  double next_normal() {
    const auto& z = detail::ziggurat();
    for (;;) {
      const std::uint64_t u = next_u64();
      const int i = static_cast<int>(u & 127);
      const std::int64_t j =
          static_cast<std::int64_t>(u >> 8) - (std::int64_t{1} << 55);
      const double x = static_cast<double>(j) * 0x1.0p-55 * z.x[i + 1];
      if (std::llabs(j) <
          static_cast<std::int64_t>((std::int64_t{1} << 55) *
                                    (z.x[i] / z.x[i + 1])))
        return x;
      if (i == 127) {
        // layer 0 tail (Marsaglia)
        double xx, yy;
        do {
          xx = -std::log(1.0 - next_unit()) / detail::ZigguratTable::tail_x;
          yy = -std::log(1.0 - next_unit());
        } while (yy + yy < xx * xx);
        const double t = detail::ZigguratTable::tail_x + xx;
        return x > 0 ? t : -t;
      }
      const double fx = std::exp(-0.5 * x * x);
      if (z.y[i + 1] + next_unit() * (z.y[i] - z.y[i + 1]) < fx) return x;
    }
  }

  /// Poisson(mean) draw. Inversion for small means, PTRS otherwise.
  std::uint64_t next_poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 12.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
  }

 private:
  static constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;

  std::uint64_t poisson_inversion(double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = next_unit();
    while (prod > limit) {
      ++k;
      prod *= next_unit();
    }
    return k;
  }

  // Hormann's transformed rejection (PTRS), valid for mean >= ~10.
  std::uint64_t poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = next_unit() - 0.5;
      const double v = next_unit();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (kf < 0.0) continue;
      if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
      if (us < 0.013 && v > us) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      const double rhs = -mean + kf * loglam - std::lgamma(kf + 1.0);
      if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
  }

  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
  std::uint64_t buffer_ = 0;
  bool buffered_ = false;
};

}  // namespace mobigg::core
