#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dmbn/error.hpp"
#include "dmbn/random.hpp"

namespace dmbn::gp {

inline constexpr double kDefaultJitter = 1e-8;
inline constexpr int kJitterEscalations = 3;

// Squared-exponential kernel k(t,t') = exp(-smoothness * (t - t')^2).
struct KernelSpec {
  double smoothness = 0.05;
  double jitter = kDefaultJitter;

  double operator()(double a, double b) const {
    const double d = a - b;
    return std::exp(-smoothness * d * d);
  }

  void validate() const {
    require(smoothness > 0.0, "kernel smoothness must be positive");
    require(jitter > 0.0, "kernel jitter must be positive");
  }

  bool operator==(const KernelSpec&) const = default;
};

inline Eigen::MatrixXd cross_gram(std::span<const double> a, std::span<const double> b, const KernelSpec& k) {
  Eigen::MatrixXd g(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) g(i, j) = k(a[i], b[j]);
  return g;
}

// Gram matrix over a time grid with its stabilized Cholesky factor and the
// inverse of (G + jitter I), which is the GP prior precision used by the sampler.
struct GramCache {
  std::vector<double> times;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd factor;     // lower triangular, factor * factor^T = gram + jitter I
  Eigen::MatrixXd precision;  // (gram + jitter I)^{-1}
  double jitter = kDefaultJitter;

  std::size_t size() const { return times.size(); }
};

// Lower Cholesky factor of `m + jitter I`, escalating jitter x10 on failure.
inline Eigen::LLT<Eigen::MatrixXd> stabilized_cholesky(const Eigen::MatrixXd& m, double& jitter) {
  const auto n = m.rows();
  for (int attempt = 0; attempt <= kJitterEscalations; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(m + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt;
    if (attempt < kJitterEscalations) jitter *= 10.0;
  }
  std::ostringstream msg;
  msg << "Cholesky factorization failed for " << n << "x" << n << " kernel matrix after jitter " << jitter;
  throw NumericalError(msg.str());
}

inline GramCache rbf_gram(std::span<const double> times, const KernelSpec& spec) {
  spec.validate();
  require(!times.empty(), "rbf_gram: need at least one time stamp");
  for (std::size_t t = 1; t < times.size(); ++t)
    require(times[t] > times[t - 1], "rbf_gram: time stamps must be strictly increasing");
  GramCache c;
  c.times.assign(times.begin(), times.end());
  c.gram = cross_gram(times, times, spec);
  c.jitter = spec.jitter;
  auto llt = stabilized_cholesky(c.gram, c.jitter);
  c.factor = llt.matrixL();
  const auto n = static_cast<Eigen::Index>(times.size());
  c.precision = llt.solve(Eigen::MatrixXd::Identity(n, n));
  c.precision = 0.5 * (c.precision + c.precision.transpose()).eval();
  return c;
}

inline Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// Draw from N(P^{-1} h, P^{-1}) using the Cholesky factor of P.
inline Eigen::VectorXd sample_gaussian_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear,
                                                 Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "posterior precision (" << precision.rows() << "x" << precision.cols()
        << ") is not positive definite; min diagonal " << precision.diagonal().minCoeff() << ", max diagonal "
        << precision.diagonal().maxCoeff();
    throw NumericalError(msg.str());
  }
  const auto& l = llt.matrixL();
  Eigen::VectorXd mean = llt.solve(linear);
  Eigen::VectorXd noise = l.transpose().solve(standard_normal_vector(precision.rows(), rng));
  return mean + noise;
}

// Draw from N(0, G + jitter I) via the cached factor.
inline Eigen::VectorXd sample_prior(const GramCache& cache, Rng& rng, double scale = 1.0) {
  return std::sqrt(scale) * (cache.factor * standard_normal_vector(cache.factor.rows(), rng));
}

struct Conditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Noise-free GP conditional at `test` given values at `train` (unit prior variance).
inline Conditional gp_conditional(std::span<const double> train, const Eigen::VectorXd& values,
                                  std::span<const double> test, const KernelSpec& spec) {
  spec.validate();
  require(!train.empty() && !test.empty(), "gp_conditional: empty time grid");
  require(static_cast<std::size_t>(values.size()) == train.size(), "gp_conditional: value length mismatch");
  double jitter = spec.jitter;
  auto llt = stabilized_cholesky(cross_gram(train, train, spec), jitter);
  const Eigen::MatrixXd k_train_test = cross_gram(train, test, spec);
  Conditional out;
  out.mean = k_train_test.transpose() * llt.solve(values);
  const Eigen::MatrixXd v = llt.matrixL().solve(k_train_test);
  out.cov = cross_gram(test, test, spec) - v.transpose() * v;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.cov);
  if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() < 0.0) {
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    out.cov = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  }
  return out;
}

// Draw from N(mean, scale * cov) for a PSD covariance.
inline Eigen::VectorXd sample_conditional(const Conditional& c, Rng& rng, double scale = 1.0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.cov);
  if (es.info() != Eigen::Success) throw NumericalError("gp conditional covariance eigendecomposition failed");
  Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd eps = standard_normal_vector(c.cov.rows(), rng);
  return c.mean + std::sqrt(scale) * (es.eigenvectors() * root.cwiseProduct(eps));
}

// Precomputed kriging map for one kernel and a fixed pair of grids, so many
// trajectories can be extrapolated without refactoring the Gram matrix.
struct Extrapolator {
  Eigen::MatrixXd weights;  // test x train
  Eigen::MatrixXd root;     // root * root^T = conditional covariance

  static Extrapolator build(std::span<const double> train, std::span<const double> test, const KernelSpec& spec) {
    spec.validate();
    double jitter = spec.jitter;
    auto llt = stabilized_cholesky(cross_gram(train, train, spec), jitter);
    const Eigen::MatrixXd k_train_test = cross_gram(train, test, spec);
    Extrapolator e;
    e.weights = llt.solve(k_train_test).transpose();
    const Eigen::MatrixXd v = llt.matrixL().solve(k_train_test);
    Eigen::MatrixXd cov = cross_gram(test, test, spec) - v.transpose() * v;
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericalError("gp conditional covariance eigendecomposition failed");
    e.root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    return e;
  }

  Eigen::VectorXd sample(const Eigen::VectorXd& values, Rng& rng, double scale = 1.0) const {
    return weights * values + std::sqrt(scale) * (root * standard_normal_vector(root.cols(), rng));
  }
};

}  // namespace dmbn::gp
