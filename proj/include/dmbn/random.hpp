#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "dmbn/error.hpp"

namespace dmbn {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++. Cheap to seed, so a fresh stream can be derived for every
// (iteration, t, k, p, q) cell without touching the chain's main stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0x5eedULL) { reseed(seed); }

  // Stream keyed by an ordered tuple of integers.
  static Rng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = seed ^ 0x6a09e667f3bcc909ULL;
    for (auto k : key) {
      std::uint64_t s = h ^ (k + 0x3c6ef372fe94f82bULL);
      h = splitmix64(s);
    }
    return Rng(h);
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(*this); }

  double exponential() { return -std::log(uniform()); }

  // Gamma with shape/rate parameterization.
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(*this);
  }

  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(*this);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

inline std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = rng.gamma(concentration[i], 1.0);
    total += out[i];
  }
  if (!(total > 0.0)) {
    // All gammas underflowed (tiny concentrations); fall back to a vertex.
    std::fill(out.begin(), out.end(), 0.0);
    out[rng.below(out.size())] = 1.0;
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

// Normalizes log-weights in place into probabilities (max-subtracted) and
// draws an index. Throws if every weight is -inf or NaN.
inline std::size_t sample_log_categorical(std::span<double> logw, Rng& rng) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logw)
    if (v > mx) mx = v;
  if (!std::isfinite(mx)) throw NumericalError("categorical: all log-weights are -inf or non-finite");
  double total = 0.0;
  for (auto& v : logw) {
    v = std::exp(v - mx);
    total += v;
  }
  for (auto& v : logw) v /= total;
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    acc += logw[i];
    if (u < acc) return i;
  }
  for (std::size_t i = logw.size(); i-- > 0;)
    if (logw[i] > 0.0) return i;
  return logw.size() - 1;
}

// k distinct indices from {0..n-1}, in sampled order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace dmbn
