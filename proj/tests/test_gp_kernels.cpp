#include <gtest/gtest.h>

#include "support.hpp"

using namespace dmbn;
using namespace dmbn::gp;

namespace {
std::vector<double> grid(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i + 1);
  return t;
}
}  // namespace

TEST(RbfGram, DiagonalAndUnitSpacing) {
  const auto c = rbf_gram(grid(5), {0.05, 1e-8});
  for (int i = 0; i < 5; ++i) EXPECT_EQ(c.gram(i, i), 1.0);
  EXPECT_NEAR(c.gram(0, 1), 0.951229424500714, 1e-15);
  EXPECT_NEAR(c.gram(3, 2), 0.951229424500714, 1e-15);
  const Eigen::MatrixXd recon = c.factor * c.factor.transpose();
  EXPECT_LT((recon - c.gram - c.jitter * Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RbfGram, LargeSmoothnessApproachesIdentity) {
  const auto c = rbf_gram(grid(6), {30.0, 1e-8});
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) EXPECT_LT(c.gram(i, j), 1e-12);
}

TEST(RbfGram, RejectsBadInput) {
  EXPECT_THROW(rbf_gram(std::vector<double>{1, 1}, {}), ValidationError);
  EXPECT_THROW(rbf_gram(std::vector<double>{}, {}), ValidationError);
  EXPECT_THROW(rbf_gram(grid(3), {-1.0, 1e-8}), ValidationError);
  EXPECT_THROW(rbf_gram(grid(3), {0.1, 0.0}), ValidationError);
}

TEST(RbfGram, JitterEscalatesOnNearSingularGrid) {
  // 36 unit-spaced stamps at a tiny smoothness are numerically rank one.
  const auto c = rbf_gram(grid(36), {5e-5, 1e-8});
  EXPECT_GE(c.jitter, 1e-8);
  EXPECT_TRUE(c.precision.allFinite());
}

TEST(RbfGram, PsdOnRandomGrids) {
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> t(2 + rng.below(20));
    double v = 0.0;
    for (auto& x : t) x = (v += 0.05 + 3.0 * rng.uniform());
    const double kappa = std::exp(rng.normal() * 2.0);
    const auto g = cross_gram(t, t, {kappa, 1e-8});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        EXPECT_GT(g(i, j), 0.0 - 1e-300);
        EXPECT_LE(g(i, j), 1.0);
      }
  }
}

TEST(GaussianPrecision, ScalarCase) {
  Rng rng(1);
  Eigen::MatrixXd p(1, 1);
  p << 4.0;
  Eigen::VectorXd h(1);
  h << 8.0;
  std::vector<double> x(100000);
  for (auto& v : x) v = sample_gaussian_precision(p, h, rng)(0);
  const auto m = testing_support::moments(x);
  EXPECT_NEAR(m.mean, 2.0, 4 * m.mean_se);
  EXPECT_NEAR(m.var, 0.25, 4 * m.var_se);
}

TEST(GaussianPrecision, IdentityCovariance) {
  Rng rng(2);
  const int n = 100000, d = 3;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd v = sample_gaussian_precision(eye, zero, rng);
    acc += v * v.transpose();
  }
  acc /= n;
  // se of a second moment of N(0,1) entries is at most sqrt(2/n)
  EXPECT_LT((acc - eye).cwiseAbs().maxCoeff(), 4 * std::sqrt(2.0 / n));
}

TEST(GaussianPrecision, GeneralMeanAndCovariance) {
  Rng rng(3);
  Eigen::MatrixXd p(2, 2);
  p << 2.0, 0.6, 0.6, 1.0;
  Eigen::VectorXd h(2);
  h << 1.0, -2.0;
  const Eigen::MatrixXd cov = p.inverse();
  const Eigen::VectorXd mean = cov * h;
  const int n = 100000;
  std::vector<double> a(n), b(n), ab(n);
  for (int i = 0; i < n; ++i) {
    const auto v = sample_gaussian_precision(p, h, rng);
    a[i] = v(0);
    b[i] = v(1);
    ab[i] = (v(0) - mean(0)) * (v(1) - mean(1));
  }
  const auto ma = testing_support::moments(a), mb = testing_support::moments(b), mab = testing_support::moments(ab);
  EXPECT_NEAR(ma.mean, mean(0), 4 * ma.mean_se);
  EXPECT_NEAR(mb.mean, mean(1), 4 * mb.mean_se);
  EXPECT_NEAR(ma.var, cov(0, 0), 4 * ma.var_se);
  EXPECT_NEAR(mb.var, cov(1, 1), 4 * mb.var_se);
  EXPECT_NEAR(mab.mean, cov(0, 1), 4 * mab.mean_se);
}

TEST(GaussianPrecision, DeterministicAndRejectsIndefinite) {
  Eigen::MatrixXd p(2, 2);
  p << 3.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd h(2);
  h << 0.5, 0.1;
  Rng a(5), b(5);
  EXPECT_EQ(sample_gaussian_precision(p, h, a), sample_gaussian_precision(p, h, b));
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(sample_gaussian_precision(bad, h, a), NumericalError);
}

TEST(GpConditional, InterpolatesObservedPoint) {
  const auto train = grid(6);
  Eigen::VectorXd v(6);
  v << 0.3, -0.2, 0.5, 1.0, 0.1, -0.7;
  const KernelSpec spec{0.5, 1e-8};
  const auto c = gp_conditional(train, v, std::vector<double>{4.0}, spec);
  EXPECT_NEAR(c.mean(0), 1.0, 1e-5);
  EXPECT_LE(c.cov(0, 0), 2 * spec.jitter);
}

TEST(GpConditional, RevertsToPriorFarAway) {
  const auto train = grid(4);
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  const KernelSpec spec{0.05, 1e-8};
  const auto c = gp_conditional(train, v, std::vector<double>{40.0}, spec);  // 0.05 * 36^2 > 40
  EXPECT_NEAR(c.mean(0), 0.0, 1e-12);
  EXPECT_NEAR(c.cov(0, 0), 1.0, 1e-12);
}

TEST(GpConditional, SingleTrainingPoint) {
  Eigen::VectorXd v(1);
  v << 3.0;
  const auto c = gp_conditional(std::vector<double>{2.0}, v, std::vector<double>{2.0}, {0.05, 1e-8});
  EXPECT_NEAR(c.mean(0), 3.0, 1e-7);
}

TEST(GpConditional, VarianceBoundedByPrior) {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto train = grid(3 + rng.below(10));
    Eigen::VectorXd v(train.size());
    for (auto& x : v) x = rng.normal();
    std::vector<double> test;
    double s = 0.0;
    for (int i = 0; i < 5; ++i) test.push_back(s += 0.3 + 4 * rng.uniform());
    const auto c = gp_conditional(train, v, test, {std::exp(rng.normal()), 1e-8});
    for (Eigen::Index i = 0; i < c.cov.rows(); ++i) {
      EXPECT_LE(c.cov(i, i), 1.0 + 1e-9);
      EXPECT_GE(c.cov(i, i), -1e-12);
    }
  }
}

TEST(Extrapolator, MatchesConditional) {
  const auto train = grid(8);
  const std::vector<double> test{8.5, 9.0, 10.0};
  const KernelSpec spec{0.05, 1e-8};
  Eigen::VectorXd v(8);
  v << 0.1, 0.4, 0.2, -0.3, -0.1, 0.5, 0.6, 0.2;
  const auto c = gp_conditional(train, v, test, spec);
  const auto e = Extrapolator::build(train, test, spec);
  EXPECT_LT((e.weights * v - c.mean).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((e.root * e.root.transpose() - c.cov).cwiseAbs().maxCoeff(), 1e-8);
}
