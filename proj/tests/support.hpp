#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "dmbn.hpp"

namespace testing_support {

struct Moments {
  double mean = 0.0, var = 0.0, mean_se = 0.0, var_se = 0.0;
};

// Sample mean/variance with standard errors for i.i.d. draws.
inline Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  m.var = m2 * n / (n - 1.0);
  m.mean_se = std::sqrt(m2 / n);
  m.var_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return m;
}

// Standard error of the mean of a correlated series by non-overlapping batches.
inline double batch_se(const std::vector<double>& x, std::size_t batches = 50) {
  const std::size_t len = x.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b)
    means[b] = std::accumulate(x.begin() + b * len, x.begin() + (b + 1) * len, 0.0) / static_cast<double>(len);
  return std::sqrt(moments(means).var / static_cast<double>(batches));
}

inline dmbn::AdjacencyTensor random_network(std::size_t n, std::size_t k, std::size_t t, double p, dmbn::Rng& rng) {
  dmbn::AdjacencyTensor a(n, k, t);
  for (std::size_t s = 0; s < t; ++s)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (rng.uniform() < p) a.set_edge(s, l, i, j);
  return a;
}

inline std::vector<int> random_assignment(std::size_t n, std::size_t blocks, dmbn::Rng& rng) {
  std::vector<int> z(n);
  for (auto& v : z) v = static_cast<int>(rng.below(blocks));
  return z;
}

inline dmbn::LatentState random_latent(const dmbn::ModelDims& d, dmbn::Rng& rng) {
  dmbn::LatentState s(d);
  for (auto& v : s.mu) v = rng.normal();
  for (auto& v : s.mu_block.flat()) v = rng.normal();
  for (auto& v : s.xbar.flat()) v = 0.7 * rng.normal();
  for (auto& v : s.x.flat()) v = 0.7 * rng.normal();
  for (auto& v : s.delta) v = 0.5 + rng.uniform();
  for (auto& v : s.delta_within.flat()) v = 0.5 + rng.uniform();
  return s;
}

}  // namespace testing_support
