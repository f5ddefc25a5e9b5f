#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "dmbn/gibbs.hpp"
#include "dmbn/gp_kernels.hpp"
#include "dmbn/model.hpp"

namespace dmbn {

struct PredictionSpec {
  std::vector<double> stamps;       // t*, strictly increasing
  std::vector<std::size_t> draws;   // indices into the trace; empty = all
  bool impute = false;              // allow stamps that coincide with training stamps
  bool keep_draws = true;           // retain per-draw pi(t*)
};

struct Forecast {
  std::vector<double> stamps;
  std::vector<BlockProbTensor> pi;       // per draw, [p][q][k][t*]
  std::vector<std::vector<int>> z;       // per draw
  EdgeProbTensor theta;                  // pooled over draws, [t*][k][i][j]
};

// Samples each latent trajectory of one draw at the new stamps from its GP
// conditional. The coordinate priors are scaled by 1/tau.
struct LatentExtrapolator {
  gp::Extrapolator mu, mu_block, cross, within;
  std::size_t future_steps = 0;

  LatentExtrapolator(std::span<const double> train, std::span<const double> test, const ModelKernels& k)
      : mu(gp::Extrapolator::build(train, test, k.mu)),
        mu_block(gp::Extrapolator::build(train, test, k.mu_block)),
        cross(gp::Extrapolator::build(train, test, k.cross)),
        within(gp::Extrapolator::build(train, test, k.within)),
        future_steps(test.size()) {}

  LatentState operator()(const LatentState& s, Rng& rng) const {
    ModelDims d = s.dims;
    const auto T = d.steps;
    d.steps = future_steps;
    LatentState out(d);
    out.delta = s.delta;
    out.delta_within = s.delta_within;
    auto project = [&](const gp::Extrapolator& e, const double* src, double* dst, double scale) {
      Eigen::Map<const Eigen::VectorXd> v(src, static_cast<Eigen::Index>(T));
      const Eigen::VectorXd f = e.sample(v, rng, scale);
      for (std::size_t t = 0; t < future_steps; ++t) dst[t] = f(t);
    };
    project(mu, s.mu.data(), out.mu.data(), 1.0);
    for (std::size_t p = 0; p < d.blocks; ++p) {
      for (std::size_t k = 0; k < d.layers; ++k) project(mu_block, &s.mu_block(p, k, 0), &out.mu_block(p, k, 0), 1.0);
      for (std::size_t r = 0; r < d.cross_dims; ++r)
        project(cross, &s.xbar(p, r, 0), &out.xbar(p, r, 0), 1.0 / s.tau(r));
      for (std::size_t k = 0; k < d.layers; ++k)
        for (std::size_t h = 0; h < d.within_dims; ++h)
          project(within, &s.x(p, k, h, 0), &out.x(p, k, h, 0), 1.0 / s.tau_within(k, h));
    }
    return out;
  }
};

inline void validate_prediction(const PosteriorTrace& trace, const PredictionSpec& spec, const ModelKernels& kernels) {
  require(!trace.records.empty(), "predict: trace has no draws");
  require(!spec.stamps.empty(), "predict: need at least one prediction stamp");
  if (!(kernels == trace.config.kernels))
    throw ValidationError("predict: kernels do not match the training configuration");
  for (std::size_t i = 1; i < spec.stamps.size(); ++i)
    require(spec.stamps[i] > spec.stamps[i - 1], "predict: stamps must be strictly increasing");
  if (!spec.impute)
    for (double s : spec.stamps)
      for (double t : trace.times)
        require(s != t, "predict: stamp " + format_real(s) + " overlaps training data (use impute mode)");
  for (auto d : spec.draws) require(d < trace.records.size(), "predict: draw index out of range");
}

inline Forecast predict_edge_probs(const PosteriorTrace& trace, const PredictionSpec& spec,
                                   const ModelKernels& kernels, Rng& rng) {
  validate_prediction(trace, spec, kernels);
  const LatentExtrapolator extrapolate(trace.times, spec.stamps, kernels);
  std::vector<std::size_t> draws = spec.draws;
  if (draws.empty()) {
    draws.resize(trace.records.size());
    for (std::size_t i = 0; i < draws.size(); ++i) draws[i] = i;
  }
  const auto nodes = trace.nodes, layers = trace.dims.layers, steps = spec.stamps.size();
  Forecast f;
  f.stamps = spec.stamps;
  f.theta = EdgeProbTensor({steps, layers, nodes, nodes}, 0.0);
  for (auto d : draws) {
    const auto& rec = trace.records[d];
    const auto pi = probabilities(logits(extrapolate(rec.latent, rng)));
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t k = 0; k < layers; ++k)
        for (std::size_t i = 0; i < nodes; ++i)
          for (std::size_t j = 0; j < nodes; ++j)
            if (i != j) f.theta(t, k, i, j) += pi(rec.z[i], rec.z[j], k, t);
    if (spec.keep_draws) {
      f.pi.push_back(pi);
      f.z.push_back(rec.z);
    }
  }
  const double scale = 1.0 / static_cast<double>(draws.size());
  for (auto& v : f.theta.flat()) v *= scale;
  return f;
}

// Posterior mean of theta over the trace on the training grid.
inline EdgeProbTensor posterior_mean_theta(const PosteriorTrace& trace) {
  require(!trace.records.empty(), "posterior mean: trace has no draws");
  const auto nodes = trace.nodes, layers = trace.dims.layers, steps = trace.dims.steps;
  EdgeProbTensor theta({steps, layers, nodes, nodes}, 0.0);
  for (const auto& rec : trace.records) {
    const auto pi = probabilities(logits(rec.latent));
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t k = 0; k < layers; ++k)
        for (std::size_t i = 0; i < nodes; ++i)
          for (std::size_t j = 0; j < nodes; ++j)
            if (i != j) theta(t, k, i, j) += pi(rec.z[i], rec.z[j], k, t);
  }
  const double scale = 1.0 / static_cast<double>(trace.records.size());
  for (auto& v : theta.flat()) v *= scale;
  return theta;
}

// A ~ Bernoulli(pi_{z_i z_j}) per unordered pair, one slice per time index of pi.
inline AdjacencyTensor sample_future_edges(const BlockProbTensor& pi, std::span<const int> z, Rng& rng,
                                           std::vector<double> stamps = {}) {
  const auto layers = pi.dim(2), steps = pi.dim(3), nodes = z.size();
  AdjacencyTensor a(nodes, layers, steps, std::move(stamps));
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t k = 0; k < layers; ++k)
      for (std::size_t i = 1; i < nodes; ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (rng.uniform() < pi(z[i], z[j], k, t)) a.set_edge(t, k, i, j);
  return a;
}

// ---------------------------------------------------------------------------
// Prediction tables: `t,layer,i,j,prob`, 1-based, i < j

struct PredictionRow {
  std::size_t t, layer, i, j;  // 1-based
  double prob;
};

// `index[s]` is the 1-based time label written for stamp s of the forecast.
inline void write_predictions(std::ostream& os, const EdgeProbTensor& theta, std::span<const std::size_t> index) {
  require(index.size() == theta.dim(0), "write_predictions: one label per stamp");
  os << "t,layer,i,j,prob\n";
  for (std::size_t t = 0; t < theta.dim(0); ++t)
    for (std::size_t k = 0; k < theta.dim(1); ++k)
      for (std::size_t i = 0; i < theta.dim(2); ++i)
        for (std::size_t j = i + 1; j < theta.dim(3); ++j)
          os << index[t] << ',' << k + 1 << ',' << i + 1 << ',' << j + 1 << ',' << format_real(theta(t, k, i, j))
             << '\n';
}

inline std::vector<PredictionRow> read_predictions(std::istream& in) {
  std::vector<PredictionRow> rows;
  CsvReader reader(in);
  std::vector<std::string> f;
  while (reader.next(f)) {
    long long v[4];
    double p;
    bool ok = f.size() == 5;
    for (int c = 0; ok && c < 4; ++c) ok = parse_integer(f[c], v[c]) && v[c] >= 1;
    if (!ok || !parse_real(f[4], p) || v[2] == v[3] || !(p >= 0.0 && p <= 1.0))
      throw ValidationError("predictions: malformed row " + std::to_string(reader.line_number()));
    rows.push_back({static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), static_cast<std::size_t>(v[2]),
                    static_cast<std::size_t>(v[3]), p});
  }
  return rows;
}

}  // namespace dmbn
