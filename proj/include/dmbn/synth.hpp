#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "dmbn/csv.hpp"
#include "dmbn/error.hpp"
#include "dmbn/forecast.hpp"
#include "dmbn/gp_kernels.hpp"
#include "dmbn/model.hpp"
#include "dmbn/network.hpp"
#include "dmbn/random.hpp"

namespace dmbn {

enum class AssignmentScheme { balanced, dirichlet };

struct SynthConfig {
  std::size_t nodes = 32;
  std::size_t blocks = 5;  // true block count
  std::size_t layers = 4;
  std::size_t steps = 12;
  std::size_t cross_dims = 6;
  std::size_t within_dims = 6;
  double smoothness = 0.05;
  std::array<double, 3> pattern_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};  // constant, seasonal, trend
  double amplitude = 1.0;  // multiplies every level, amplitude and drift
  std::uint64_t seed = 1;
  AssignmentScheme scheme = AssignmentScheme::balanced;
  bool no_blocks = false;  // one block per node

  std::size_t effective_blocks() const { return no_blocks ? nodes : blocks; }

  void validate() const {
    require(nodes >= 2, "synth: N must be >= 2");
    require(layers >= 1 && steps >= 1, "synth: K and T must be >= 1");
    require(no_blocks || (blocks >= 1 && blocks <= nodes), "synth: need 1 <= B_true <= N");
    require(cross_dims >= 1 && within_dims >= 1, "synth: R and H must be >= 1");
    require(smoothness > 0.0, "synth: smoothness must be positive");
    require(amplitude >= 0.0, "synth: amplitude must be nonnegative");
    double s = 0.0;
    for (double w : pattern_mix) {
      require(w >= 0.0, "synth: pattern weights must be nonnegative");
      s += w;
    }
    require(s > 0.0, "synth: pattern weights must not all be zero");
  }
};

struct SynthData {
  AdjacencyTensor data;
  EdgeProbTensor theta;  // [t][k][i][j]
  std::vector<int> z;    // 0-based
  LatentState latent;
};

namespace detail {

enum class Pattern { constant, seasonal, trend };

// Row-normalized RBF Gram matrix: a linear smoother over the time grid.
inline Eigen::MatrixXd smoother(std::span<const double> times, double smoothness) {
  Eigen::MatrixXd g = gp::cross_gram(times, times, gp::KernelSpec{smoothness, gp::kDefaultJitter});
  for (Eigen::Index i = 0; i < g.rows(); ++i) g.row(i) /= g.row(i).sum();
  return g;
}

inline Eigen::VectorXd pattern_trajectory(std::span<const double> times, const SynthConfig& cfg, Rng& rng) {
  const auto T = times.size();
  const double total = cfg.pattern_mix[0] + cfg.pattern_mix[1] + cfg.pattern_mix[2];
  const double u = rng.uniform() * total;
  const Pattern kind = u < cfg.pattern_mix[0]                         ? Pattern::constant
                       : u < cfg.pattern_mix[0] + cfg.pattern_mix[1] ? Pattern::seasonal
                                                                      : Pattern::trend;
  auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  Eigen::VectorXd v(T);
  const double t0 = times.front();
  const double span = times.back() - t0;
  switch (kind) {
    case Pattern::constant: {
      const double level = unif(-2.0, 2.0);
      v.setConstant(level);
      break;
    }
    case Pattern::seasonal: {
      const double amp = unif(0.5, 2.0), phase = unif(0.0, 2.0 * std::numbers::pi);
      const double period = std::max(1.0, static_cast<double>(T) / 2.0);
      for (std::size_t t = 0; t < T; ++t)
        v(t) = amp * std::sin(2.0 * std::numbers::pi * (times[t] - t0) / period + phase);
      break;
    }
    case Pattern::trend: {
      const double level = unif(-2.0, 2.0), drift = unif(-2.0, 2.0);
      const double slope = span > 0.0 ? drift / span : 0.0;
      for (std::size_t t = 0; t < T; ++t) v(t) = level + slope * (times[t] - t0);
      break;
    }
  }
  return cfg.amplitude * v;
}

}  // namespace detail

inline SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto blocks = cfg.effective_blocks();
  std::vector<double> times(cfg.steps);
  for (std::size_t t = 0; t < cfg.steps; ++t) times[t] = static_cast<double>(t + 1);

  SynthData out;
  out.z.resize(cfg.nodes);
  if (cfg.no_blocks) {
    for (std::size_t i = 0; i < cfg.nodes; ++i) out.z[i] = static_cast<int>(i);
  } else if (cfg.scheme == AssignmentScheme::balanced) {
    std::vector<int> labels(cfg.nodes);
    for (std::size_t i = 0; i < cfg.nodes; ++i) labels[i] = static_cast<int>(i % blocks);
    const auto perm = sample_without_replacement(cfg.nodes, cfg.nodes, rng);
    for (std::size_t i = 0; i < cfg.nodes; ++i) out.z[perm[i]] = labels[i];
  } else {
    const std::vector<double> alpha(blocks, 1.0);
    const auto eta = sample_dirichlet(alpha, rng);
    for (auto& v : out.z) {
      std::vector<double> lw(blocks);
      for (std::size_t p = 0; p < blocks; ++p)
        lw[p] = eta[p] > 0 ? std::log(eta[p]) : -std::numeric_limits<double>::infinity();
      v = static_cast<int>(sample_log_categorical(lw, rng));
    }
  }

  const Eigen::MatrixXd smooth = detail::smoother(times, cfg.smoothness);
  auto fill = [&](double* dst) {
    const Eigen::VectorXd v = smooth * detail::pattern_trajectory(times, cfg, rng);
    for (std::size_t t = 0; t < cfg.steps; ++t) dst[t] = v(t);
  };
  out.latent = LatentState(ModelDims{blocks, cfg.layers, cfg.steps, cfg.cross_dims, cfg.within_dims});
  auto& s = out.latent;
  fill(s.mu.data());
  for (std::size_t p = 0; p < blocks; ++p) {
    for (std::size_t k = 0; k < cfg.layers; ++k) fill(&s.mu_block(p, k, 0));
    for (std::size_t r = 0; r < cfg.cross_dims; ++r) fill(&s.xbar(p, r, 0));
    for (std::size_t k = 0; k < cfg.layers; ++k)
      for (std::size_t h = 0; h < cfg.within_dims; ++h) fill(&s.x(p, k, h, 0));
  }
  const auto pi = probabilities(logits(s));
  out.theta = edge_probabilities(pi, out.z);
  out.data = sample_future_edges(pi, out.z, rng, times);
  return out;
}

// ---------------------------------------------------------------------------
// Ground-truth files

inline void write_truth_theta(std::ostream& os, const EdgeProbTensor& theta) {
  os << "t,layer,i,j,prob\n";
  for (std::size_t t = 0; t < theta.dim(0); ++t)
    for (std::size_t k = 0; k < theta.dim(1); ++k)
      for (std::size_t i = 0; i < theta.dim(2); ++i)
        for (std::size_t j = i + 1; j < theta.dim(3); ++j)
          os << t + 1 << ',' << k + 1 << ',' << i + 1 << ',' << j + 1 << ',' << format_real(theta(t, k, i, j)) << '\n';
}

inline void write_assignments(std::ostream& os, std::span<const int> z, const char* column = "block") {
  os << "i," << column << '\n';
  for (std::size_t i = 0; i < z.size(); ++i) os << i + 1 << ',' << z[i] + 1 << '\n';
}

inline void write_ground_truth(const std::filesystem::path& dir, const EdgeProbTensor& theta, std::span<const int> z) {
  std::filesystem::create_directories(dir);
  std::ofstream th(dir / "truth_theta.csv"), zf(dir / "truth_z.csv");
  if (!th || !zf) throw IoError("cannot write ground truth into " + dir.string());
  write_truth_theta(th, theta);
  write_assignments(zf, z);
}

// Reads `t,layer,i,j,prob` rows into a [t][k][i][j] tensor (symmetric fill).
inline EdgeProbTensor read_probability_table(std::istream& in, std::size_t nodes, std::size_t layers,
                                             std::size_t steps) {
  EdgeProbTensor theta({steps, layers, nodes, nodes}, 0.0);
  CsvReader reader(in);
  std::vector<std::string> f;
  while (reader.next(f)) {
    long long t, k, i, j;
    double p;
    if (f.size() != 5 || !parse_integer(f[0], t) || !parse_integer(f[1], k) || !parse_integer(f[2], i) ||
        !parse_integer(f[3], j) || !parse_real(f[4], p))
      throw ValidationError("probability table: malformed row " + std::to_string(reader.line_number()));
    if (t < 1 || t > static_cast<long long>(steps) || k < 1 || k > static_cast<long long>(layers) || i < 1 ||
        i > static_cast<long long>(nodes) || j < 1 || j > static_cast<long long>(nodes) || i == j)
      throw ValidationError("probability table: index out of range at row " + std::to_string(reader.line_number()));
    theta(t - 1, k - 1, i - 1, j - 1) = theta(t - 1, k - 1, j - 1, i - 1) = p;
  }
  return theta;
}

inline std::vector<int> read_assignments(std::istream& in, std::size_t nodes) {
  std::vector<int> z(nodes, -1);
  CsvReader reader(in);
  std::vector<std::string> f;
  while (reader.next(f)) {
    long long i, b;
    if (f.size() != 2 || !parse_integer(f[0], i) || !parse_integer(f[1], b) || i < 1 ||
        i > static_cast<long long>(nodes) || b < 1)
      throw ValidationError("assignments: malformed row " + std::to_string(reader.line_number()));
    z[i - 1] = static_cast<int>(b - 1);
  }
  for (std::size_t i = 0; i < nodes; ++i)
    if (z[i] < 0) throw ValidationError("assignments: missing node " + std::to_string(i + 1));
  return z;
}

}  // namespace dmbn
