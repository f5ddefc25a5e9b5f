#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmbn/error.hpp"
#include "dmbn/gp_kernels.hpp"
#include "dmbn/model.hpp"
#include "dmbn/network.hpp"
#include "dmbn/parallel.hpp"
#include "dmbn/polya_gamma.hpp"
#include "dmbn/random.hpp"

namespace dmbn {

// Annealed random scan: fraction of nodes revisited at each iteration.
struct ScanSchedule {
  double f_min = 0.1;
  double decay = 5.0;
  bool operator==(const ScanSchedule&) const = default;
};

struct GibbsConfig {
  std::size_t iterations = 5000;
  double burnin = 0.2;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  std::size_t blocks = 10;
  std::size_t cross_dims = 6;
  std::size_t within_dims = 6;
  ModelKernels kernels = ModelKernels::uniform(0.05);
  double a1 = 2.0;
  double a2 = 2.0;
  double alpha = 1.0;
  int pg_threshold = pg::kDefaultThreshold;
  ScanSchedule scan;
  bool fixed_assignments = false;
  std::vector<int> initial_z;  // 0-based; empty = uniform random
  PairCounting pair_counting = PairCounting::unordered;
  int threads = 0;  // 0 = default_threads()

  std::size_t burnin_iterations() const { return static_cast<std::size_t>(std::floor(burnin * iterations)); }
  std::size_t kept_records() const { return (iterations - burnin_iterations()) / thin; }

  void validate(std::size_t nodes) const {
    require(iterations >= 1, "iterations must be >= 1");
    require(burnin >= 0.0 && burnin < 1.0, "burnin must lie in [0, 1)");
    require(thin >= 1, "thin must be >= 1");
    require(blocks >= 1, "B must be >= 1");
    require(cross_dims >= 1 && within_dims >= 1, "R and H must be >= 1");
    require(a1 > 0.0 && a2 > 0.0, "a1 and a2 must be positive");
    require(alpha > 0.0, "alpha must be positive");
    require(pg_threshold >= 1, "pg_threshold must be >= 1");
    require(scan.f_min > 0.0 && scan.f_min <= 1.0, "scan f_min must lie in (0, 1]");
    require(scan.decay >= 0.0, "scan decay must be nonnegative");
    for (const auto* k : {&kernels.mu, &kernels.mu_block, &kernels.cross, &kernels.within}) k->validate();
    if (fixed_assignments)
      require(!initial_z.empty() || blocks == nodes, "fixed assignments without initial_z require B = N");
    if (!initial_z.empty()) {
      require(initial_z.size() == nodes, "initial_z must have one entry per node");
      for (int b : initial_z) require(b >= 0 && static_cast<std::size_t>(b) < blocks, "initial_z out of range");
    }
  }
};

// Unstructured per-node model: one block per node, assignments frozen.
inline GibbsConfig dmn_config(std::size_t nodes, GibbsConfig base) {
  base.blocks = nodes;
  base.fixed_assignments = true;
  base.initial_z.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) base.initial_z[i] = static_cast<int>(i);
  return base;
}

// Polya-Gamma auxiliaries omega[p][q][k][t].
using PGAux = Tensor<double, 4>;

// Gaussian full conditional in information form.
struct GaussianConditional {
  Eigen::MatrixXd precision;
  Eigen::VectorXd linear;

  Eigen::VectorXd mean() const { return precision.llt().solve(linear); }
  Eigen::VectorXd sample(Rng& rng) const { return gp::sample_gaussian_precision(precision, linear, rng); }
};

struct GammaParams {
  double shape;
  double rate;
};

// Cached GP prior factors on the training grid.
struct PriorCaches {
  gp::GramCache mu, mu_block, cross, within;

  static PriorCaches build(std::span<const double> times, const ModelKernels& k) {
    return {gp::rbf_gram(times, k.mu), gp::rbf_gram(times, k.mu_block), gp::rbf_gram(times, k.cross),
            gp::rbf_gram(times, k.within)};
  }
};

inline double excess(const SufficientStats& s, std::size_t p, std::size_t q, std::size_t k, std::size_t t) {
  return static_cast<double>(s.y(p, q, k, t)) - 0.5 * static_cast<double>(s.n(p, q, k, t));
}

// ---------------------------------------------------------------------------
// Step 1: block probabilities

inline std::vector<double> eta_posterior_concentration(const BlockState& b) {
  std::vector<double> c(b.blocks);
  for (std::size_t p = 0; p < b.blocks; ++p) c[p] = b.alpha[p] + static_cast<double>(b.sizes[p]);
  return c;
}

inline void update_eta(BlockState& b, Rng& rng) { b.eta = sample_dirichlet(eta_posterior_concentration(b), rng); }

// ---------------------------------------------------------------------------
// Step 2: Polya-Gamma auxiliaries

// Each cell draws from its own stream keyed by (stream, p, q, k, t), so the
// result is independent of the thread count.
inline PGAux update_omega(const LogitTensor& psi, const SufficientStats& stats, int threshold, Rng& rng,
                          int threads = 1) {
  const auto blocks = psi.dim(0), layers = psi.dim(2), steps = psi.dim(3);
  PGAux omega(psi.dims(), 0.0);
  const std::uint64_t stream = rng();
  const std::size_t cells = blocks * (blocks + 1) / 2 * layers * steps;
  parallel_for(cells, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      std::size_t rest = c;
      const std::size_t t = rest % steps;
      rest /= steps;
      const std::size_t k = rest % layers;
      rest /= layers;
      // rest indexes the lower triangle (p >= q) row-major
      std::size_t p = static_cast<std::size_t>((std::sqrt(8.0 * rest + 1.0) - 1.0) / 2.0);
      while (p * (p + 1) / 2 > rest) --p;
      while ((p + 1) * (p + 2) / 2 <= rest) ++p;
      const std::size_t q = rest - p * (p + 1) / 2;
      const auto n = stats.n(p, q, k, t);
      if (n == 0) continue;
      Rng cell = Rng::keyed(stream, {p, q, k, t});
      const double w = pg::sample(n, psi(p, q, k, t), cell, threshold);
      omega(p, q, k, t) = omega(q, p, k, t) = w;
    }
  });
  return omega;
}

// ---------------------------------------------------------------------------
// Step 3: between-block intercept mu(t)

inline GaussianConditional mu_posterior(const LatentState& s, const SufficientStats& stats, const PGAux& omega,
                                        const gp::GramCache& prior) {
  const auto& d = s.dims;
  GaussianConditional g{prior.precision, Eigen::VectorXd::Zero(d.steps)};
  for (std::size_t t = 0; t < d.steps; ++t) {
    double w_sum = 0.0, h = 0.0;
    for (std::size_t k = 0; k < d.layers; ++k)
      for (std::size_t p = 1; p < d.blocks; ++p)
        for (std::size_t q = 0; q < p; ++q) {
          const double w = omega(p, q, k, t);
          w_sum += w;
          h += excess(stats, p, q, k, t) - w * (s.cross_dot(p, q, t) + s.within_dot(p, q, k, t));
        }
    g.precision(t, t) += w_sum;
    g.linear(t) = h;
  }
  return g;
}

inline void update_mu_global(LatentState& s, const SufficientStats& stats, const PGAux& omega,
                             const gp::GramCache& prior, Rng& rng) {
  const Eigen::VectorXd draw = mu_posterior(s, stats, omega, prior).sample(rng);
  for (std::size_t t = 0; t < s.dims.steps; ++t) s.mu[t] = draw(t);
}

// ---------------------------------------------------------------------------
// Step 4: cross-layer block coordinates, stacked as index r*T + t

inline GaussianConditional xbar_posterior(const LatentState& s, const SufficientStats& stats, const PGAux& omega,
                                          const gp::GramCache& prior, std::size_t p) {
  const auto& d = s.dims;
  const auto T = d.steps, R = d.cross_dims;
  GaussianConditional g{Eigen::MatrixXd::Zero(R * T, R * T), Eigen::VectorXd::Zero(R * T)};
  for (std::size_t r = 0; r < R; ++r) g.precision.block(r * T, r * T, T, T) = s.tau(r) * prior.precision;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < d.layers; ++k)
      for (std::size_t q = 0; q < d.blocks; ++q) {
        const double w = omega(p, q, k, t);
        const double e = excess(stats, p, q, k, t);
        if (w == 0.0 && e == 0.0) continue;
        if (q == p) {
          const double resid = e - w * s.mu_block(p, k, t);
          for (std::size_t r = 0; r < R; ++r) {
            g.linear(r * T + t) += resid;
            for (std::size_t u = 0; u < R; ++u) g.precision(r * T + t, u * T + t) += w;
          }
        } else {
          const double resid = e - w * (s.mu[t] + s.within_dot(p, q, k, t));
          for (std::size_t r = 0; r < R; ++r) {
            const double xr = s.xbar(q, r, t);
            g.linear(r * T + t) += xr * resid;
            for (std::size_t u = 0; u < R; ++u) g.precision(r * T + t, u * T + t) += w * xr * s.xbar(q, u, t);
          }
        }
      }
  return g;
}

inline void update_xbar(LatentState& s, const SufficientStats& stats, const PGAux& omega,
                        const gp::GramCache& prior, Rng& rng) {
  const auto T = s.dims.steps, R = s.dims.cross_dims;
  for (std::size_t p = 0; p < s.dims.blocks; ++p) {
    const Eigen::VectorXd draw = xbar_posterior(s, stats, omega, prior, p).sample(rng);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t t = 0; t < T; ++t) s.xbar(p, r, t) = draw(r * T + t);
  }
}

// ---------------------------------------------------------------------------
// Step 5: within-layer coordinates, stacked as index h*T + t

inline GaussianConditional x_within_posterior(const LatentState& s, const SufficientStats& stats,
                                              const PGAux& omega, const gp::GramCache& prior, std::size_t k,
                                              std::size_t p) {
  const auto& d = s.dims;
  const auto T = d.steps, H = d.within_dims;
  GaussianConditional g{Eigen::MatrixXd::Zero(H * T, H * T), Eigen::VectorXd::Zero(H * T)};
  for (std::size_t h = 0; h < H; ++h) g.precision.block(h * T, h * T, T, T) = s.tau_within(k, h) * prior.precision;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t q = 0; q < d.blocks; ++q) {
      if (q == p) continue;  // the diagonal logit carries no within-layer term
      const double w = omega(p, q, k, t);
      const double e = excess(stats, p, q, k, t);
      if (w == 0.0 && e == 0.0) continue;
      const double resid = e - w * (s.mu[t] + s.cross_dot(p, q, t));
      for (std::size_t h = 0; h < H; ++h) {
        const double xh = s.x(q, k, h, t);
        g.linear(h * T + t) += xh * resid;
        for (std::size_t u = 0; u < H; ++u) g.precision(h * T + t, u * T + t) += w * xh * s.x(q, k, u, t);
      }
    }
  return g;
}

inline void update_x_within(LatentState& s, const SufficientStats& stats, const PGAux& omega,
                            const gp::GramCache& prior, Rng& rng) {
  const auto T = s.dims.steps, H = s.dims.within_dims;
  for (std::size_t k = 0; k < s.dims.layers; ++k)
    for (std::size_t p = 0; p < s.dims.blocks; ++p) {
      const Eigen::VectorXd draw = x_within_posterior(s, stats, omega, prior, k, p).sample(rng);
      for (std::size_t h = 0; h < H; ++h)
        for (std::size_t t = 0; t < T; ++t) s.x(p, k, h, t) = draw(h * T + t);
    }
}

// ---------------------------------------------------------------------------
// Steps 6-7: multiplicative gamma shrinkage

namespace detail {

inline double prior_quadratic(const gp::GramCache& prior, const double* v, std::size_t n) {
  Eigen::Map<const Eigen::VectorXd> x(v, static_cast<Eigen::Index>(n));
  return x.dot(prior.precision * x);
}

// Conditional of gamma increment `j` given the others: the prior of dimension
// m >= j has precision prod_{f <= m} delta_f, and quad[m] sums x^T K^{-1} x
// over blocks for that dimension.
inline GammaParams shrinkage_params(std::span<const double> delta, std::span<const double> quad, std::size_t j,
                                    double a1, double a2, std::size_t blocks, std::size_t steps) {
  const std::size_t dims = delta.size();
  double rate = 1.0;
  double theta = 1.0;
  for (std::size_t f = 0; f < j; ++f) theta *= delta[f];
  for (std::size_t m = j; m < dims; ++m) {
    if (m > j) theta *= delta[m];
    rate += 0.5 * theta * quad[m];
  }
  const double shape = (j == 0 ? a1 : a2) + 0.5 * static_cast<double>(blocks * steps * (dims - j));
  return {shape, rate};
}

}  // namespace detail

inline std::vector<double> cross_quadratics(const LatentState& s, const gp::GramCache& prior) {
  std::vector<double> quad(s.dims.cross_dims, 0.0);
  for (std::size_t m = 0; m < s.dims.cross_dims; ++m)
    for (std::size_t p = 0; p < s.dims.blocks; ++p)
      quad[m] += detail::prior_quadratic(prior, &s.xbar(p, m, 0), s.dims.steps);
  return quad;
}

inline std::vector<double> within_quadratics(const LatentState& s, const gp::GramCache& prior, std::size_t k) {
  std::vector<double> quad(s.dims.within_dims, 0.0);
  for (std::size_t l = 0; l < s.dims.within_dims; ++l)
    for (std::size_t p = 0; p < s.dims.blocks; ++p)
      quad[l] += detail::prior_quadratic(prior, &s.x(p, k, l, 0), s.dims.steps);
  return quad;
}

inline GammaParams shrinkage_cross_params(const LatentState& s, const gp::GramCache& prior, double a1, double a2,
                                          std::size_t r) {
  const auto quad = cross_quadratics(s, prior);
  return detail::shrinkage_params(s.delta, quad, r, a1, a2, s.dims.blocks, s.dims.steps);
}

inline void update_shrinkage_cross(LatentState& s, const gp::GramCache& prior, double a1, double a2, Rng& rng) {
  const auto quad = cross_quadratics(s, prior);
  for (std::size_t r = 0; r < s.dims.cross_dims; ++r) {
    const auto g = detail::shrinkage_params(s.delta, quad, r, a1, a2, s.dims.blocks, s.dims.steps);
    s.delta[r] = rng.gamma(g.shape, g.rate);
  }
}

inline GammaParams shrinkage_within_params(const LatentState& s, const gp::GramCache& prior, double a1, double a2,
                                           std::size_t k, std::size_t h) {
  const auto quad = within_quadratics(s, prior, k);
  std::span<const double> delta(&s.delta_within(k, 0), s.dims.within_dims);
  return detail::shrinkage_params(delta, quad, h, a1, a2, s.dims.blocks, s.dims.steps);
}

inline void update_shrinkage_within(LatentState& s, const gp::GramCache& prior, double a1, double a2, Rng& rng) {
  for (std::size_t k = 0; k < s.dims.layers; ++k) {
    const auto quad = within_quadratics(s, prior, k);
    std::span<double> delta(&s.delta_within(k, 0), s.dims.within_dims);
    for (std::size_t h = 0; h < s.dims.within_dims; ++h) {
      const auto g = detail::shrinkage_params(delta, quad, h, a1, a2, s.dims.blocks, s.dims.steps);
      delta[h] = rng.gamma(g.shape, g.rate);
    }
  }
}

// ---------------------------------------------------------------------------
// Step 8: within-block intercepts

inline GaussianConditional mu_within_posterior(const LatentState& s, const SufficientStats& stats,
                                               const PGAux& omega, const gp::GramCache& prior, std::size_t p,
                                               std::size_t k) {
  const auto T = s.dims.steps;
  GaussianConditional g{prior.precision, Eigen::VectorXd::Zero(T)};
  for (std::size_t t = 0; t < T; ++t) {
    const double w = omega(p, p, k, t);
    g.precision(t, t) += w;
    g.linear(t) = excess(stats, p, p, k, t) - w * s.cross_sum(p, t);
  }
  return g;
}

inline void update_mu_within(LatentState& s, const SufficientStats& stats, const PGAux& omega,
                             const gp::GramCache& prior, Rng& rng) {
  for (std::size_t p = 0; p < s.dims.blocks; ++p)
    for (std::size_t k = 0; k < s.dims.layers; ++k) {
      const Eigen::VectorXd draw = mu_within_posterior(s, stats, omega, prior, p, k).sample(rng);
      for (std::size_t t = 0; t < s.dims.steps; ++t) s.mu_block(p, k, t) = draw(t);
    }
}

// ---------------------------------------------------------------------------
// Step 10: block assignments

inline double scan_fraction(std::size_t iter, std::size_t total, const ScanSchedule& sched) {
  if (total == 0) return 1.0;
  const double f = std::exp(-sched.decay * static_cast<double>(iter) / static_cast<double>(total));
  return std::max(sched.f_min, std::min(1.0, f));
}

inline std::vector<std::size_t> scan_set(std::size_t iter, std::size_t total, const ScanSchedule& sched,
                                         std::size_t nodes, bool fixed_assignments, Rng& rng) {
  if (fixed_assignments) return {};
  const auto size =
      static_cast<std::size_t>(std::ceil(scan_fraction(iter, total, sched) * static_cast<double>(nodes) - 1e-9));
  return sample_without_replacement(nodes, size, rng);
}

// Row of log assignment weights (unnormalized) for node i, with i's own
// neighbor counts `m` and the other nodes' block sizes. Uses
// log(pi) - log(1 - pi) = psi and log(1 - pi) = -softplus(psi).
inline std::vector<double> assignment_log_weights(const LogitTensor& psi, const Tensor<double, 2>& log_miss,
                                                  std::span<const double> eta, const Tensor<std::int64_t, 3>& m,
                                                  std::span<const std::int64_t> other_sizes) {
  const auto blocks = psi.dim(0), layers = psi.dim(2), steps = psi.dim(3);
  std::vector<double> lw(blocks);
  for (std::size_t p = 0; p < blocks; ++p) {
    double v = eta[p] > 0.0 ? std::log(eta[p]) : -std::numeric_limits<double>::infinity();
    if (!std::isfinite(v)) {
      lw[p] = v;
      continue;
    }
    for (std::size_t q = 0; q < blocks; ++q) {
      v += static_cast<double>(other_sizes[q]) * log_miss(p, q);
      for (std::size_t k = 0; k < layers; ++k)
        for (std::size_t t = 0; t < steps; ++t) {
          const auto c = m(q, k, t);
          if (c) v += static_cast<double>(c) * psi(p, q, k, t);
        }
    }
    lw[p] = v;
  }
  return lw;
}

// sum_{k,t} log(1 - pi_pq(k,t))
inline Tensor<double, 2> log_miss_totals(const LogitTensor& psi) {
  const auto blocks = psi.dim(0), layers = psi.dim(2), steps = psi.dim(3);
  Tensor<double, 2> out({blocks, blocks}, 0.0);
  for (std::size_t p = 0; p < blocks; ++p)
    for (std::size_t q = 0; q < blocks; ++q)
      for (std::size_t k = 0; k < layers; ++k)
        for (std::size_t t = 0; t < steps; ++t) out(p, q) -= softplus(psi(p, q, k, t));
  return out;
}

struct AssignmentPosterior {
  std::vector<std::size_t> nodes;
  std::vector<std::vector<double>> gamma;  // one simplex row per visited node
};

// Sequential update of z over `visit`, maintaining `stats` and block sizes.
inline AssignmentPosterior update_assignments(const AdjacencyTensor& a, BlockState& b, SufficientStats& stats,
                                              const LogitTensor& psi, std::span<const std::size_t> visit,
                                              PairCounting counting, Rng& rng) {
  AssignmentPosterior out;
  const auto log_miss = log_miss_totals(psi);
  std::vector<std::int64_t> others(b.blocks);
  for (std::size_t i : visit) {
    const auto m = neighbor_block_counts(a, b.z, i, b.blocks);
    const int old = b.z[i];
    for (std::size_t q = 0; q < b.blocks; ++q) others[q] = b.sizes[q] - (static_cast<int>(q) == old ? 1 : 0);
    auto lw = assignment_log_weights(psi, log_miss, b.eta, m, others);
    const int next = static_cast<int>(sample_log_categorical(lw, rng));
    if (next != old) {
      move_node(stats, b.sizes, m, old, next, counting);
      b.z[i] = next;
    }
    out.nodes.push_back(i);
    out.gamma.push_back(std::move(lw));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampler state and chain driver

inline constexpr std::array<const char*, 10> kStepNames = {
    "eta", "omega", "mu", "xbar", "x", "delta", "delta_within", "mu_within", "probabilities", "assignments"};

struct StepTimings {
  std::array<double, 10> seconds{};
  double total() const {
    double s = 0.0;
    for (double v : seconds) s += v;
    return s;
  }
};

class GibbsSampler {
 public:
  GibbsSampler(const AdjacencyTensor& data, GibbsConfig cfg)
      : cfg_(std::move(cfg)),
        data_(&data),
        dims_{cfg_.blocks, data.layers(), data.steps(), cfg_.cross_dims, cfg_.within_dims},
        priors_(PriorCaches::build(data.times(), cfg_.kernels)),
        rng_(cfg_.seed),
        threads_(cfg_.threads > 0 ? cfg_.threads : default_threads()) {
    cfg_.validate(data.nodes());
  }

  // Random assignments (or cfg.initial_z), latents from their GP priors, all
  // gammas equal to one.
  void initialize() {
    std::vector<int> z = cfg_.initial_z;
    if (z.empty()) {
      if (cfg_.fixed_assignments) {
        z.resize(data_->nodes());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<int>(i);
      } else {
        z.resize(data_->nodes());
        for (auto& v : z) v = static_cast<int>(rng_.below(cfg_.blocks));
      }
    }
    blocks_ = BlockState::from_assignments(std::move(z), cfg_.blocks, cfg_.alpha);
    latent_ = LatentState(dims_);
    draw_latents_from_prior();
    refresh_stats();
    psi_ = logits(latent_);
  }

  // Every parameter from its prior, including gammas, eta and z.
  void initialize_from_prior() {
    latent_ = LatentState(dims_);
    for (std::size_t r = 0; r < dims_.cross_dims; ++r) latent_.delta[r] = rng_.gamma(r == 0 ? cfg_.a1 : cfg_.a2, 1.0);
    for (std::size_t k = 0; k < dims_.layers; ++k)
      for (std::size_t h = 0; h < dims_.within_dims; ++h)
        latent_.delta_within(k, h) = rng_.gamma(h == 0 ? cfg_.a1 : cfg_.a2, 1.0);
    draw_latents_from_prior();
    std::vector<double> alpha(cfg_.blocks, cfg_.alpha);
    std::vector<int> z(data_->nodes());
    auto eta = sample_dirichlet(alpha, rng_);
    if (cfg_.fixed_assignments) {
      z = cfg_.initial_z.empty() ? identity_assignment() : cfg_.initial_z;
    } else {
      for (auto& v : z) {
        std::vector<double> lw(eta.size());
        for (std::size_t p = 0; p < eta.size(); ++p)
          lw[p] = eta[p] > 0 ? std::log(eta[p]) : -std::numeric_limits<double>::infinity();
        v = static_cast<int>(sample_log_categorical(lw, rng_));
      }
    }
    blocks_ = BlockState::from_assignments(std::move(z), cfg_.blocks, cfg_.alpha);
    blocks_.eta = std::move(eta);
    refresh_stats();
    psi_ = logits(latent_);
  }

  // Swap in a new data tensor of identical shape (successive-conditional tests).
  void set_data(const AdjacencyTensor& data) {
    require(data.nodes() == data_->nodes() && data.layers() == data_->layers() && data.steps() == data_->steps(),
            "set_data: shape mismatch");
    data_ = &data;
    refresh_stats();
  }

  // One full sweep through steps 1..10 for iteration `iter` of `total`.
  void step(std::size_t iter, std::size_t total) {
    auto tick = Clock::now();
    auto lap = [&](int idx) {
      auto now = Clock::now();
      timings_.seconds[idx] += std::chrono::duration<double>(now - tick).count();
      tick = now;
    };
    update_eta(blocks_, rng_);
    lap(0);
    omega_ = update_omega(psi_, stats_, cfg_.pg_threshold, rng_, threads_);
    lap(1);
    update_mu_global(latent_, stats_, omega_, priors_.mu, rng_);
    lap(2);
    update_xbar(latent_, stats_, omega_, priors_.cross, rng_);
    lap(3);
    update_x_within(latent_, stats_, omega_, priors_.within, rng_);
    lap(4);
    update_shrinkage_cross(latent_, priors_.cross, cfg_.a1, cfg_.a2, rng_);
    lap(5);
    update_shrinkage_within(latent_, priors_.within, cfg_.a1, cfg_.a2, rng_);
    lap(6);
    update_mu_within(latent_, stats_, omega_, priors_.mu_block, rng_);
    lap(7);
    psi_ = logits(latent_);
    lap(8);
    const auto visit = scan_set(iter, total, cfg_.scan, data_->nodes(), cfg_.fixed_assignments, rng_);
    if (!visit.empty()) last_assignment_ = update_assignments(*data_, blocks_, stats_, psi_, visit, cfg_.pair_counting, rng_);
    lap(9);
#ifndef NDEBUG
    check_invariants();
#endif
  }

  // Throws if any structural invariant is violated.
  void check_invariants() const {
    double s = 0.0;
    for (double e : blocks_.eta) {
      if (!(e >= 0.0)) throw NumericalError("eta has a negative entry");
      s += e;
    }
    if (std::fabs(s - 1.0) > 1e-9) throw NumericalError("eta does not sum to one");
    std::int64_t total = 0;
    for (auto n : blocks_.sizes) total += n;
    if (total != static_cast<std::int64_t>(data_->nodes())) throw NumericalError("block sizes do not sum to N");
    for (double d : latent_.delta)
      if (!(d > 0.0)) throw NumericalError("cross-layer gamma is not positive");
    for (double d : latent_.delta_within.flat())
      if (!(d > 0.0)) throw NumericalError("within-layer gamma is not positive");
    for (double v : omega_.flat())
      if (!(v >= 0.0)) throw NumericalError("Polya-Gamma auxiliary is negative");
    for (double v : psi_.flat())
      if (!std::isfinite(v)) throw NumericalError("non-finite logit");
  }

  void refresh_stats() {
    stats_ = block_stats(*data_, blocks_.z, cfg_.blocks, cfg_.pair_counting);
    blocks_.recount();
  }

  const GibbsConfig& config() const { return cfg_; }
  const ModelDims& dims() const { return dims_; }
  const LatentState& latent() const { return latent_; }
  LatentState& latent() { return latent_; }
  const BlockState& blocks() const { return blocks_; }
  BlockState& blocks() { return blocks_; }
  const SufficientStats& stats() const { return stats_; }
  const PGAux& omega() const { return omega_; }
  const LogitTensor& psi() const { return psi_; }
  const PriorCaches& priors() const { return priors_; }
  const AssignmentPosterior& last_assignment() const { return last_assignment_; }
  const StepTimings& timings() const { return timings_; }
  Rng& rng() { return rng_; }

 private:
  using Clock = std::chrono::steady_clock;

  std::vector<int> identity_assignment() const {
    std::vector<int> z(data_->nodes());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<int>(i);
    return z;
  }

  void draw_latents_from_prior() {
    const auto T = dims_.steps;
    auto fill = [&](double* dst, const gp::GramCache& c, double scale) {
      const Eigen::VectorXd v = gp::sample_prior(c, rng_, scale);
      for (std::size_t t = 0; t < T; ++t) dst[t] = v(t);
    };
    fill(latent_.mu.data(), priors_.mu, 1.0);
    for (std::size_t p = 0; p < dims_.blocks; ++p) {
      for (std::size_t k = 0; k < dims_.layers; ++k) fill(&latent_.mu_block(p, k, 0), priors_.mu_block, 1.0);
      for (std::size_t r = 0; r < dims_.cross_dims; ++r)
        fill(&latent_.xbar(p, r, 0), priors_.cross, 1.0 / latent_.tau(r));
      for (std::size_t k = 0; k < dims_.layers; ++k)
        for (std::size_t h = 0; h < dims_.within_dims; ++h)
          fill(&latent_.x(p, k, h, 0), priors_.within, 1.0 / latent_.tau_within(k, h));
    }
  }

  GibbsConfig cfg_;
  const AdjacencyTensor* data_;
  ModelDims dims_;
  PriorCaches priors_;
  Rng rng_;
  int threads_;
  BlockState blocks_;
  LatentState latent_;
  SufficientStats stats_;
  PGAux omega_;
  LogitTensor psi_;
  AssignmentPosterior last_assignment_;
  StepTimings timings_;
};

// ---------------------------------------------------------------------------
// Trace

struct TraceRecord {
  std::size_t iteration = 0;
  LatentState latent;
  std::vector<double> eta;
  std::vector<int> z;
};

struct PosteriorTrace {
  ModelDims dims;
  std::size_t nodes = 0;
  std::vector<double> times;
  GibbsConfig config;
  std::vector<TraceRecord> records;
  StepTimings timings;
  double wall_seconds = 0.0;
};

// Runs steps 1..10 for cfg.iterations and keeps every thin-th post-burn-in draw.
inline PosteriorTrace run_chain(const AdjacencyTensor& a, const GibbsConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  GibbsSampler sampler(a, cfg);
  sampler.initialize();
  PosteriorTrace trace;
  trace.dims = sampler.dims();
  trace.nodes = a.nodes();
  trace.times = a.times();
  trace.config = cfg;
  const auto burn = cfg.burnin_iterations();
  trace.records.reserve(cfg.kept_records());
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    try {
      sampler.step(it, cfg.iterations);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(it) + ": " + e.what());
    }
    if (it >= burn && (it - burn + 1) % cfg.thin == 0)
      trace.records.push_back({it, sampler.latent(), sampler.blocks().eta, sampler.blocks().z});
  }
  trace.timings = sampler.timings();
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace dmbn
