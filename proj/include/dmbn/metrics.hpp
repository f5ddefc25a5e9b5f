#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dmbn/error.hpp"
#include "dmbn/model.hpp"
#include "dmbn/network.hpp"

namespace dmbn {

// ---------------------------------------------------------------------------
// Network summaries

inline double density(const EdgeProbTensor& theta, std::size_t k, std::size_t t) {
  const auto n = theta.dim(2);
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) s += theta(t, k, i, j);
  return s / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

inline double density(const AdjacencyTensor& a, std::size_t k, std::size_t t) {
  const auto n = a.nodes();
  if (n < 2) return 0.0;
  return static_cast<double>(a.edge_count(t, k)) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

inline double expected_degree(const EdgeProbTensor& theta, std::size_t i, std::size_t k, std::size_t t) {
  double s = 0.0;
  for (std::size_t j = 0; j < theta.dim(3); ++j)
    if (j != i) s += theta(t, k, i, j);
  return s;
}

// Mean absolute error over i < j, all layers and times.
inline double mae(const EdgeProbTensor& estimate, const EdgeProbTensor& truth) {
  require(estimate.dims() == truth.dims(), "mae: shape mismatch");
  const auto steps = truth.dim(0), layers = truth.dim(1), n = truth.dim(2);
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t k = 0; k < layers; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          s += std::fabs(estimate(t, k, i, j) - truth(t, k, i, j));
          ++count;
        }
  require(count > 0, "mae: no node pairs");
  return s / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double fpr, tpr, threshold;
};

struct RocResult {
  std::vector<RocPoint> curve;
  double auc = 0.0;
};

// AUC as the probability that a random positive outscores a random negative,
// ties counted one half (Mann-Whitney with midranks). The curve sweeps
// thresholds from high to low, starting at (0, 0).
inline RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), "roc_auc: scores and labels differ in length");
  std::size_t pos = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, "roc_auc: labels must be binary");
    pos += static_cast<std::size_t>(l);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ValidationError("roc_auc: AUC undefined with a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocResult out;
  out.curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double rank_sum = 0.0;  // ranks in ascending order, 1-based
  std::size_t tp = 0, fp = 0;
  const std::size_t n = order.size();
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t tie_pos = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) tie_pos += static_cast<std::size_t>(labels[order[j++]]);
    // descending positions i..j-1 correspond to ascending ranks n-j+1..n-i
    const double mid = 0.5 * (static_cast<double>(n - j + 1) + static_cast<double>(n - i));
    rank_sum += mid * static_cast<double>(tie_pos);
    tp += tie_pos;
    fp += (j - i) - tie_pos;
    out.curve.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos, scores[order[i]]});
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  out.auc = (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
  return out;
}

// ---------------------------------------------------------------------------
// Partitions

// C_ij = fraction of draws with z_i = z_j.
inline Eigen::MatrixXd coclustering(const std::vector<std::vector<int>>& draws) {
  require(!draws.empty(), "coclustering: no assignment draws");
  const auto n = static_cast<Eigen::Index>(draws.front().size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (const auto& z : draws) {
    require(static_cast<Eigen::Index>(z.size()) == n, "coclustering: inconsistent node counts");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (z[i] == z[j]) c(i, j) += 1.0;
  }
  c /= static_cast<double>(draws.size());
  c.diagonal().setOnes();
  return c;
}

// Average-linkage agglomerative clustering on 1 - C, cut at `clusters` groups.
// Labels are 0-based in order of first appearance.
inline std::vector<int> consensus_partition(const Eigen::MatrixXd& c, std::size_t clusters) {
  const auto n = static_cast<std::size_t>(c.rows());
  require(clusters >= 1, "consensus_partition: need at least one cluster");
  clusters = std::min(clusters, n);
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(n, n) - c;
  std::vector<bool> alive(n, true);
  std::size_t groups = n;
  while (groups > clusters) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b)
        if (alive[b] && dist(a, b) < best) {
          best = dist(a, b);
          ba = a;
          bb = b;
        }
    }
    const double wa = static_cast<double>(members[ba].size()), wb = static_cast<double>(members[bb].size());
    for (std::size_t x = 0; x < n; ++x) {
      if (!alive[x] || x == ba || x == bb) continue;
      const double d = (wa * dist(ba, x) + wb * dist(bb, x)) / (wa + wb);
      dist(ba, x) = dist(x, ba) = d;
    }
    members[ba].insert(members[ba].end(), members[bb].begin(), members[bb].end());
    members[bb].clear();
    alive[bb] = false;
    --groups;
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    for (std::size_t a = 0; a < n; ++a)
      if (alive[a] && std::find(members[a].begin(), members[a].end(), i) != members[a].end()) {
        for (auto m : members[a]) label[m] = next;
        break;
      }
    ++next;
  }
  return label;
}

// Most frequent number of occupied blocks across draws (ties go to the smaller count).
inline std::size_t modal_occupied_blocks(const std::vector<std::vector<int>>& draws) {
  require(!draws.empty(), "modal_occupied_blocks: no assignment draws");
  std::map<std::size_t, std::size_t> freq;
  for (const auto& z : draws) {
    std::vector<int> u(z);
    std::sort(u.begin(), u.end());
    ++freq[static_cast<std::size_t>(std::unique(u.begin(), u.end()) - u.begin())];
  }
  std::size_t best = 0, count = 0;
  for (const auto& [k, v] : freq)
    if (v > count) {
      best = k;
      count = v;
    }
  return best;
}

inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size(), "adjusted_rand_index: partitions differ in length");
  auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [_, v] : table) index += choose2(v);
  for (const auto& [_, v] : rows) sa += choose2(v);
  for (const auto& [_, v] : cols) sb += choose2(v);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0 ? sa * sb / total : 0.0;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace dmbn
