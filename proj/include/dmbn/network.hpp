#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include "dmbn/csv.hpp"
#include "dmbn/error.hpp"
#include "dmbn/tensor.hpp"

namespace dmbn {

// Binary undirected dynamic multilayer graph, indexed [t][k][i][j], 0-based.
class AdjacencyTensor {
 public:
  AdjacencyTensor() = default;

  AdjacencyTensor(std::size_t nodes, std::size_t layers, std::size_t steps,
                  std::vector<double> times = {})
      : n_(nodes), k_(layers), t_(steps), times_(std::move(times)), a_({steps, layers, nodes, nodes}, 0) {
    if (times_.empty()) {
      times_.resize(steps);
      for (std::size_t t = 0; t < steps; ++t) times_[t] = static_cast<double>(t + 1);
    }
    require(times_.size() == steps, "times: expected " + std::to_string(steps) + " stamps, got " +
                                        std::to_string(times_.size()));
    for (std::size_t t = 1; t < times_.size(); ++t)
      require(times_[t] > times_[t - 1], "times: stamps must be strictly increasing");
  }

  std::size_t nodes() const { return n_; }
  std::size_t layers() const { return k_; }
  std::size_t steps() const { return t_; }
  const std::vector<double>& times() const { return times_; }

  std::uint8_t operator()(std::size_t t, std::size_t k, std::size_t i, std::size_t j) const {
    return a_(t, k, i, j);
  }

  // Sets both (i,j) and (j,i). Self-loops are rejected.
  void set_edge(std::size_t t, std::size_t k, std::size_t i, std::size_t j, bool present = true) {
    require(i != j, "self-loop at node " + std::to_string(i + 1));
    a_(t, k, i, j) = a_(t, k, j, i) = present ? 1 : 0;
  }

  std::size_t edge_count(std::size_t t, std::size_t k) const {
    std::size_t c = 0;
    for (std::size_t i = 1; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j) c += a_(t, k, i, j);
    return c;
  }

  // Pointer to row i of layer k at time t (length N).
  const std::uint8_t* row(std::size_t t, std::size_t k, std::size_t i) const { return &a_(t, k, i, 0); }

  // The first `steps` time slices.
  AdjacencyTensor head(std::size_t steps) const {
    require(steps >= 1 && steps <= t_, "head: invalid number of time steps");
    AdjacencyTensor out(n_, k_, steps, std::vector<double>(times_.begin(), times_.begin() + steps));
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t k = 0; k < k_; ++k)
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t j = 0; j < n_; ++j) out.a_(t, k, i, j) = a_(t, k, i, j);
    out.node_names = node_names;
    return out;
  }

  bool operator==(const AdjacencyTensor& o) const {
    return n_ == o.n_ && k_ == o.k_ && t_ == o.t_ && times_ == o.times_ && a_ == o.a_;
  }

  std::vector<std::string> node_names;

 private:
  std::size_t n_ = 0, k_ = 0, t_ = 0;
  std::vector<double> times_;
  Tensor<std::uint8_t, 4> a_;
};

// Rows that failed validation while reading an edge list.
class EdgeListError : public ValidationError {
 public:
  explicit EdgeListError(std::vector<std::string> problems)
      : ValidationError(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "edge list rejected:";
    for (const auto& x : p) s += "\n  " + x;
    return s;
  }
  std::vector<std::string> problems_;
};

// Reads `t,layer,i,j` rows (1-based). Collects every bad row before throwing.
inline AdjacencyTensor load_edge_list(std::istream& in, std::size_t nodes, std::size_t layers,
                                      std::size_t steps, std::vector<double> times = {}) {
  AdjacencyTensor a(nodes, layers, steps, std::move(times));
  std::vector<std::string> problems;
  CsvReader reader(in);
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    const auto line = reader.line_number();
    if (fields.size() != 4) {
      problems.push_back("row " + std::to_string(line) + ": expected 4 fields");
      continue;
    }
    long long v[4];
    bool ok = true;
    for (int c = 0; c < 4; ++c) ok = ok && parse_integer(fields[c], v[c]);
    if (!ok) {
      problems.push_back("row " + std::to_string(line) + ": non-integer field");
      continue;
    }
    const auto [t, k, i, j] = std::tuple{v[0], v[1], v[2], v[3]};
    bool row_ok = true;
    if (i == j) {
      problems.push_back("row " + std::to_string(line) + ": self-loop on node " + std::to_string(i));
      row_ok = false;
    }
    auto in_range = [](long long x, std::size_t hi) { return x >= 1 && x <= static_cast<long long>(hi); };
    if (!in_range(t, steps) || !in_range(k, layers) || !in_range(i, nodes) || !in_range(j, nodes)) {
      problems.push_back("row " + std::to_string(line) + ": index out of range");
      row_ok = false;
    }
    if (row_ok) a.set_edge(t - 1, k - 1, i - 1, j - 1);
  }
  if (!problems.empty()) throw EdgeListError(std::move(problems));
  return a;
}

// One row per undirected edge with i < j, ordered by (t, layer, i, j).
inline void write_edge_list(std::ostream& out, const AdjacencyTensor& a) {
  out << "t,layer,i,j\n";
  for (std::size_t t = 0; t < a.steps(); ++t)
    for (std::size_t k = 0; k < a.layers(); ++k)
      for (std::size_t i = 0; i < a.nodes(); ++i)
        for (std::size_t j = i + 1; j < a.nodes(); ++j)
          if (a(t, k, i, j)) out << t + 1 << ',' << k + 1 << ',' << i + 1 << ',' << j + 1 << '\n';
}

inline std::vector<double> load_times(std::istream& in, std::size_t steps) {
  std::vector<double> times(steps, 0.0);
  std::vector<bool> seen(steps, false);
  CsvReader reader(in);
  std::vector<std::string> f;
  while (reader.next(f)) {
    long long t = 0;
    double stamp = 0.0;
    if (f.size() != 2 || !parse_integer(f[0], t) || !parse_real(f[1], stamp))
      throw ValidationError("times: malformed row " + std::to_string(reader.line_number()));
    if (t < 1 || t > static_cast<long long>(steps))
      throw ValidationError("times: index out of range at row " + std::to_string(reader.line_number()));
    times[t - 1] = stamp;
    seen[t - 1] = true;
  }
  for (std::size_t t = 0; t < steps; ++t)
    if (!seen[t]) throw ValidationError("times: missing stamp for t=" + std::to_string(t + 1));
  return times;
}

inline void write_times(std::ostream& out, const std::vector<double>& times) {
  out << "t,stamp\n";
  for (std::size_t t = 0; t < times.size(); ++t) out << t + 1 << ',' << format_real(times[t]) << '\n';
}

inline std::vector<std::string> load_node_names(std::istream& in, std::size_t nodes) {
  std::vector<std::string> names(nodes);
  CsvReader reader(in);
  std::vector<std::string> f;
  while (reader.next(f)) {
    long long i = 0;
    if (f.size() != 2 || !parse_integer(f[0], i) || i < 1 || i > static_cast<long long>(nodes))
      throw ValidationError("node names: malformed row " + std::to_string(reader.line_number()));
    names[i - 1] = f[1];
  }
  return names;
}

// ---------------------------------------------------------------------------
// Block bookkeeping

struct BlockState {
  std::size_t blocks = 0;
  std::vector<int> z;           // 0-based block of each node
  std::vector<double> eta;      // block probabilities
  std::vector<double> alpha;    // Dirichlet concentration
  std::vector<std::int64_t> sizes;

  static BlockState from_assignments(std::vector<int> z, std::size_t blocks, double alpha = 1.0) {
    BlockState s;
    s.blocks = blocks;
    s.z = std::move(z);
    s.eta.assign(blocks, 1.0 / static_cast<double>(blocks));
    s.alpha.assign(blocks, alpha);
    s.recount();
    return s;
  }

  void recount() {
    sizes.assign(blocks, 0);
    for (int b : z) {
      require(b >= 0 && static_cast<std::size_t>(b) < blocks, "assignment out of range");
      ++sizes[b];
    }
  }
};

// How within-block node pairs enter the Binomial counts. `ordered` counts each
// unordered pair {i,j} in the same block twice (n_pp = n_p(n_p-1), y_pp even);
// `unordered` counts it once (n_pp = n_p(n_p-1)/2). Cross-block cells agree.
enum class PairCounting { ordered, unordered };

inline std::int64_t diagonal_weight(PairCounting c) { return c == PairCounting::ordered ? 2 : 1; }

// Trial/success counts indexed [p][q][k][t], symmetric in (p,q).
struct SufficientStats {
  Tensor<std::int64_t, 4> n;
  Tensor<std::int64_t, 4> y;
  bool operator==(const SufficientStats&) const = default;
};

inline void fill_pair_counts(SufficientStats& s, std::span<const std::int64_t> sizes, PairCounting counting) {
  const auto blocks = s.n.dim(0), layers = s.n.dim(2), steps = s.n.dim(3);
  const auto w = diagonal_weight(counting);
  for (std::size_t p = 0; p < blocks; ++p)
    for (std::size_t q = 0; q < blocks; ++q) {
      const std::int64_t v = p == q ? sizes[p] * (sizes[p] - 1) * w / 2 : sizes[p] * sizes[q];
      for (std::size_t k = 0; k < layers; ++k)
        for (std::size_t t = 0; t < steps; ++t) s.n(p, q, k, t) = v;
    }
}

inline SufficientStats block_stats(const AdjacencyTensor& a, std::span<const int> z, std::size_t blocks,
                                   PairCounting counting = PairCounting::ordered) {
  require(blocks >= 1, "block_stats: need at least one block");
  require(z.size() == a.nodes(), "block_stats: assignment length does not match node count");
  const auto layers = a.layers(), steps = a.steps(), nodes = a.nodes();
  SufficientStats s{Tensor<std::int64_t, 4>({blocks, blocks, layers, steps}, 0),
                    Tensor<std::int64_t, 4>({blocks, blocks, layers, steps}, 0)};
  std::vector<std::int64_t> sizes(blocks, 0);
  for (int b : z) {
    require(b >= 0 && static_cast<std::size_t>(b) < blocks, "block_stats: assignment out of range");
    ++sizes[b];
  }
  fill_pair_counts(s, sizes, counting);
  const auto w = diagonal_weight(counting);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t k = 0; k < layers; ++k)
      for (std::size_t i = 1; i < nodes; ++i) {
        const auto* row = a.row(t, k, i);
        for (std::size_t j = 0; j < i; ++j) {
          if (!row[j]) continue;
          const auto p = z[i], q = z[j];
          if (p == q) {
            s.y(p, p, k, t) += w;
          } else {
            s.y(p, q, k, t) += 1;
            s.y(q, p, k, t) += 1;
          }
        }
      }
  return s;
}

// Edges from node i to each block at every (k,t), excluding i itself: [q][k][t].
inline Tensor<std::int64_t, 3> neighbor_block_counts(const AdjacencyTensor& a, std::span<const int> z,
                                                     std::size_t i, std::size_t blocks) {
  Tensor<std::int64_t, 3> m({blocks, a.layers(), a.steps()}, 0);
  for (std::size_t t = 0; t < a.steps(); ++t)
    for (std::size_t k = 0; k < a.layers(); ++k) {
      const auto* row = a.row(t, k, i);
      for (std::size_t j = 0; j < a.nodes(); ++j)
        if (j != i && row[j]) ++m(z[j], k, t);
    }
  return m;
}

// Moves node i between blocks, updating counts in place. `m` holds the node's
// neighbor counts per block (from neighbor_block_counts) and `sizes` the block
// sizes before the move.
inline void move_node(SufficientStats& s, std::vector<std::int64_t>& sizes, const Tensor<std::int64_t, 3>& m,
                      int from, int to, PairCounting counting) {
  if (from == to) return;
  const auto blocks = s.n.dim(0), layers = s.n.dim(2), steps = s.n.dim(3);
  const auto w = diagonal_weight(counting);
  for (std::size_t k = 0; k < layers; ++k)
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t q = 0; q < blocks; ++q) {
        const auto c = m(q, k, t);
        if (c == 0) continue;
        const int qi = static_cast<int>(q);
        if (qi == from) {
          s.y(from, from, k, t) -= w * c;
        } else {
          s.y(from, q, k, t) -= c;
          s.y(q, from, k, t) -= c;
        }
        if (qi == to) {
          s.y(to, to, k, t) += w * c;
        } else {
          s.y(to, q, k, t) += c;
          s.y(q, to, k, t) += c;
        }
      }
  --sizes[from];
  ++sizes[to];
  fill_pair_counts(s, sizes, counting);
}

}  // namespace dmbn
