#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dmbn/gp_kernels.hpp"
#include "dmbn/network.hpp"
#include "dmbn/tensor.hpp"

namespace dmbn {

// Shape of the latent parameterization.
struct ModelDims {
  std::size_t blocks = 10;
  std::size_t layers = 1;
  std::size_t steps = 1;
  std::size_t cross_dims = 6;   // R
  std::size_t within_dims = 6;  // H

  bool operator==(const ModelDims&) const = default;
};

// One smoothness per latent process group.
struct ModelKernels {
  gp::KernelSpec mu;        // between-block intercept
  gp::KernelSpec mu_block;  // within-block intercepts
  gp::KernelSpec cross;     // cross-layer coordinates
  gp::KernelSpec within;    // within-layer coordinates

  static ModelKernels uniform(double smoothness, double jitter = gp::kDefaultJitter) {
    gp::KernelSpec k{smoothness, jitter};
    return {k, k, k, k};
  }
  bool operator==(const ModelKernels&) const = default;
};

// Latent trajectories and shrinkage gammas of the block model.
//   mu[t]                 between-block intercept
//   mu_block[p][k][t]     within-block intercepts
//   xbar[p][r][t]         cross-layer coordinates
//   x[p][k][h][t]         within-layer coordinates
//   delta[r], delta_within[k][h]  multiplicative gamma increments
struct LatentState {
  ModelDims dims;
  std::vector<double> mu;
  Tensor<double, 3> mu_block;
  Tensor<double, 3> xbar;
  Tensor<double, 4> x;
  std::vector<double> delta;
  Tensor<double, 2> delta_within;

  LatentState() = default;
  explicit LatentState(const ModelDims& d)
      : dims(d),
        mu(d.steps, 0.0),
        mu_block({d.blocks, d.layers, d.steps}, 0.0),
        xbar({d.blocks, d.cross_dims, d.steps}, 0.0),
        x({d.blocks, d.layers, d.within_dims, d.steps}, 0.0),
        delta(d.cross_dims, 1.0),
        delta_within({d.layers, d.within_dims}, 1.0) {}

  // Cumulative product: tau_r = prod_{u <= r} delta_u.
  double tau(std::size_t r) const {
    double v = 1.0;
    for (std::size_t u = 0; u <= r; ++u) v *= delta[u];
    return v;
  }
  double tau_within(std::size_t k, std::size_t h) const {
    double v = 1.0;
    for (std::size_t u = 0; u <= h; ++u) v *= delta_within(k, u);
    return v;
  }

  double cross_dot(std::size_t p, std::size_t q, std::size_t t) const {
    double s = 0.0;
    for (std::size_t r = 0; r < dims.cross_dims; ++r) s += xbar(p, r, t) * xbar(q, r, t);
    return s;
  }
  double cross_sum(std::size_t p, std::size_t t) const {
    double s = 0.0;
    for (std::size_t r = 0; r < dims.cross_dims; ++r) s += xbar(p, r, t);
    return s;
  }
  double within_dot(std::size_t p, std::size_t q, std::size_t k, std::size_t t) const {
    double s = 0.0;
    for (std::size_t h = 0; h < dims.within_dims; ++h) s += x(p, k, h, t) * x(q, k, h, t);
    return s;
  }

  // Logit of block pair (p,q) at layer k, time t.
  double logit(std::size_t p, std::size_t q, std::size_t k, std::size_t t) const {
    if (p == q) return mu_block(p, k, t) + cross_sum(p, t);
    return mu[t] + cross_dot(p, q, t) + within_dot(p, q, k, t);
  }

  bool operator==(const LatentState&) const = default;
};

// psi[p][q][k][t]
using LogitTensor = Tensor<double, 4>;
// pi[p][q][k][t]
using BlockProbTensor = Tensor<double, 4>;
// theta[t][k][i][j]
using EdgeProbTensor = Tensor<double, 4>;

inline LogitTensor logits(const LatentState& s) {
  const auto& d = s.dims;
  LogitTensor psi({d.blocks, d.blocks, d.layers, d.steps}, 0.0);
  for (std::size_t p = 0; p < d.blocks; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t k = 0; k < d.layers; ++k)
        for (std::size_t t = 0; t < d.steps; ++t) psi(p, q, k, t) = psi(q, p, k, t) = s.logit(p, q, k, t);
  return psi;
}

inline double logistic(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// log(1 + exp(v)) without overflow.
inline double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

inline BlockProbTensor probabilities(const LogitTensor& psi) {
  BlockProbTensor pi(psi.dims());
  auto src = psi.flat();
  auto dst = pi.flat();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = logistic(src[i]);
  return pi;
}

// Binomial complete-data log-likelihood over block pairs q <= p.
inline double log_likelihood(const BlockProbTensor& pi, const SufficientStats& stats) {
  const auto blocks = pi.dim(0), layers = pi.dim(2), steps = pi.dim(3);
  double ll = 0.0;
  for (std::size_t p = 0; p < blocks; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t k = 0; k < layers; ++k)
        for (std::size_t t = 0; t < steps; ++t) {
          const auto n = stats.n(p, q, k, t), y = stats.y(p, q, k, t);
          if (n == 0) continue;
          const double v = pi(p, q, k, t);
          if (y > 0) ll += static_cast<double>(y) * std::log(v);
          if (n - y > 0) ll += static_cast<double>(n - y) * std::log1p(-v);
        }
  return ll;
}

// theta_ij(k,t) = pi_{z_i z_j}(k,t); zero diagonal.
inline EdgeProbTensor edge_probabilities(const BlockProbTensor& pi, std::span<const int> z) {
  const auto layers = pi.dim(2), steps = pi.dim(3), nodes = z.size();
  EdgeProbTensor theta({steps, layers, nodes, nodes}, 0.0);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t k = 0; k < layers; ++k)
      for (std::size_t i = 0; i < nodes; ++i)
        for (std::size_t j = 0; j < nodes; ++j)
          if (i != j) theta(t, k, i, j) = pi(z[i], z[j], k, t);
  return theta;
}

}  // namespace dmbn
