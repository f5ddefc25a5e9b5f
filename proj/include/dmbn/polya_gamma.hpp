#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "dmbn/error.hpp"
#include "dmbn/random.hpp"

namespace dmbn::pg {

inline constexpr double kSmallTilt = 1e-4;
inline constexpr int kDefaultThreshold = 100;
inline constexpr int kMaxNormalRetries = 64;

namespace detail {

// sech^2(c/2) = 1 - tanh^2(c/2), written with exp(-|c|) so it neither
// overflows nor cancels for large |c|.
inline double sech2_half(double c) {
  const double e = std::exp(-std::fabs(c));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

inline void check_shape(double b) {
  if (!(b > 0.0)) throw std::domain_error("Polya-Gamma shape must be positive");
}

}  // namespace detail

// E[omega] for omega ~ PG(b, c).
inline double mean(double b, double c) {
  detail::check_shape(b);
  c = std::fabs(c);
  if (c < kSmallTilt) return 0.25 * b * (1.0 - c * c / 12.0);
  return b * std::tanh(0.5 * c) / (2.0 * c);
}

// Var[omega] for omega ~ PG(b, c).
inline double variance(double b, double c) {
  detail::check_shape(b);
  c = std::fabs(c);
  if (c < kSmallTilt) return b / 24.0 * (1.0 - c * c / 5.0);
  const double alpha = std::tanh(0.5 * c);
  return -b * detail::sech2_half(c) / (4.0 * c * c) + b * alpha / (2.0 * c * c * c);
}

namespace detail {

inline constexpr double kTrunc = 0.64;
inline constexpr double kTruncRecip = 1.0 / kTrunc;

inline double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// Piecewise coefficients of the alternating series for J*(1, z).
inline double series_term(int n, double x) {
  const double k = (n + 0.5) * std::numbers::pi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x <= 0.0) return 0.0;
  const double e = -1.5 * (std::log(0.5 * std::numbers::pi) + std::log(x)) + std::log(k) -
                   2.0 * (n + 0.5) * (n + 0.5) / x;
  return std::exp(e);
}

// Probability of proposing from the exponential tail (x > kTrunc).
inline double exponential_mass(double z) {
  const double t = kTrunc;
  const double fz = 0.125 * std::numbers::pi * std::numbers::pi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - z + log_normal_cdf(b);
  const double xa = x0 + z + log_normal_cdf(a);
  const double q_over_p = 4.0 / std::numbers::pi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian IG(1/z, 1) truncated to (0, kTrunc).
inline double truncated_inverse_gaussian(double z, Rng& rng) {
  const double t = kTrunc;
  double x = t + 1.0;
  if (kTruncRecip > z) {
    double accept = 0.0;
    while (rng.uniform() > accept) {
      double e1 = rng.exponential(), e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / t) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * t;
      x = t / (x * x);
      accept = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace detail

// One PG(1, c) draw by Devroye's alternating-series rejection sampler.
inline double sample_one(double c, Rng& rng) {
  const double z = 0.5 * std::fabs(c);
  const double fz = 0.125 * std::numbers::pi * std::numbers::pi + 0.5 * z * z;
  const double p_exp = detail::exponential_mass(z);
  while (true) {
    const double x = rng.uniform() < p_exp ? detail::kTrunc + rng.exponential() / fz
                                           : detail::truncated_inverse_gaussian(z, rng);
    double s = detail::series_term(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= detail::series_term(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += detail::series_term(n, x);
        if (y > s) break;
      }
    }
  }
}

// Sum of b independent PG(1, c) draws. b = 0 is the point mass at zero.
inline double sample_exact(std::int64_t b, double c, Rng& rng) {
  if (b < 0) throw std::domain_error("Polya-Gamma shape must be nonnegative");
  double total = 0.0;
  for (std::int64_t i = 0; i < b; ++i) total += sample_one(c, rng);
  return total;
}

// Moment-matched normal draw, rejecting nonpositive values.
inline double sample_normal_approx(std::int64_t b, double c, Rng& rng) {
  const double m = mean(static_cast<double>(b), c);
  const double sd = std::sqrt(variance(static_cast<double>(b), c));
  for (int attempt = 0; attempt < kMaxNormalRetries; ++attempt) {
    const double w = m + sd * rng.normal();
    if (w > 0.0) return w;
  }
  throw NumericalError("Polya-Gamma normal approximation: no positive draw in " +
                       std::to_string(kMaxNormalRetries) + " attempts (b=" + std::to_string(b) +
                       ", c=" + std::to_string(c) + ")");
}

inline bool uses_normal_approx(std::int64_t b, int threshold) { return b >= threshold; }

// PG(b, c) for integer b >= 0: exact below `threshold`, normal at or above.
inline double sample(std::int64_t b, double c, Rng& rng, int threshold = kDefaultThreshold) {
  if (b < 0) throw std::domain_error("Polya-Gamma shape must be nonnegative");
  if (b == 0) return 0.0;
  if (uses_normal_approx(b, threshold)) return sample_normal_approx(b, c, rng);
  return sample_exact(b, c, rng);
}

}  // namespace dmbn::pg
