#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmbn/error.hpp"
#include "dmbn/gibbs.hpp"
#include "dmbn/synth.hpp"

namespace dmbn {

using json = nlohmann::json;

struct PredictOptions {
  std::size_t horizon = 0;
  std::vector<double> stamps;
  bool impute = false;
  std::size_t max_draws = 0;  // 0 = every kept draw
};

struct DataOptions {
  std::size_t nodes = 0, layers = 0, steps = 0;  // 0 = infer
  std::string times_path;
  std::string names_path;
};

// Everything a CLI run needs, resolved against defaults.
struct RunConfig {
  std::uint64_t seed = 1;
  GibbsConfig gibbs;
  std::size_t holdout = 0;  // trailing time steps withheld from fitting
  std::string init_path;    // optional assignments CSV (i,block)
  SynthConfig synth;
  PredictOptions predict;
  DataOptions data;
  std::size_t report_clusters = 0;  // 0 = B
};

namespace config_detail {

inline void check_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError("config: `" + section + "` must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ValidationError("config: unknown key `" + (section.empty() ? key : section + "." + key) + "`");
}

template <class T>
void read(const json& obj, const std::string& section, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: wrong type for `" + section + "." + key + "`");
  }
}

inline PairCounting parse_counting(const std::string& s) {
  if (s == "unordered") return PairCounting::unordered;
  if (s == "ordered") return PairCounting::ordered;
  throw ValidationError("config: gibbs.within_block_pairs must be `ordered` or `unordered`");
}

}  // namespace config_detail

inline json gibbs_to_json(const GibbsConfig& g) {
  return {{"B", g.blocks},
          {"R", g.cross_dims},
          {"H", g.within_dims},
          {"iterations", g.iterations},
          {"burnin", g.burnin},
          {"thin", g.thin},
          {"seed", g.seed},
          {"a1", g.a1},
          {"a2", g.a2},
          {"alpha", g.alpha},
          {"pg_threshold", g.pg_threshold},
          {"kappa_mu", g.kernels.mu.smoothness},
          {"kappa_mu_p", g.kernels.mu_block.smoothness},
          {"kappa_xbar", g.kernels.cross.smoothness},
          {"kappa_x", g.kernels.within.smoothness},
          {"jitter", g.kernels.mu.jitter},
          {"scan_f_min", g.scan.f_min},
          {"scan_decay", g.scan.decay},
          {"fixed_assignments", g.fixed_assignments},
          {"within_block_pairs", g.pair_counting == PairCounting::ordered ? "ordered" : "unordered"}};
}

inline const std::set<std::string>& gibbs_keys() {
  static const std::set<std::string> keys = {
      "B",         "R",          "H",          "iterations", "burnin",     "thin",       "seed",
      "a1",        "a2",         "alpha",      "pg_threshold", "kappa_mu", "kappa_mu_p", "kappa_xbar",
      "kappa_x",   "kappa",      "jitter",     "scan_f_min", "scan_decay", "fixed_assignments",
      "within_block_pairs",      "holdout",    "init_path",  "threads"};
  return keys;
}

// Reads the `gibbs` section into `g` (unspecified keys keep their values).
inline void gibbs_from_json(const json& j, GibbsConfig& g, std::size_t* holdout = nullptr,
                            std::string* init_path = nullptr) {
  using namespace config_detail;
  const std::string sec = "gibbs";
  check_keys(j, sec, gibbs_keys());
  read(j, sec, "B", g.blocks);
  read(j, sec, "R", g.cross_dims);
  read(j, sec, "H", g.within_dims);
  read(j, sec, "iterations", g.iterations);
  read(j, sec, "burnin", g.burnin);
  read(j, sec, "thin", g.thin);
  read(j, sec, "seed", g.seed);
  read(j, sec, "a1", g.a1);
  read(j, sec, "a2", g.a2);
  read(j, sec, "alpha", g.alpha);
  read(j, sec, "pg_threshold", g.pg_threshold);
  double common = -1.0;
  read(j, sec, "kappa", common);
  if (common > 0.0) {
    g.kernels.mu.smoothness = g.kernels.mu_block.smoothness = common;
    g.kernels.cross.smoothness = g.kernels.within.smoothness = common;
  }
  read(j, sec, "kappa_mu", g.kernels.mu.smoothness);
  read(j, sec, "kappa_mu_p", g.kernels.mu_block.smoothness);
  read(j, sec, "kappa_xbar", g.kernels.cross.smoothness);
  read(j, sec, "kappa_x", g.kernels.within.smoothness);
  double jitter = g.kernels.mu.jitter;
  read(j, sec, "jitter", jitter);
  for (auto* k : {&g.kernels.mu, &g.kernels.mu_block, &g.kernels.cross, &g.kernels.within}) k->jitter = jitter;
  read(j, sec, "scan_f_min", g.scan.f_min);
  read(j, sec, "scan_decay", g.scan.decay);
  read(j, sec, "fixed_assignments", g.fixed_assignments);
  read(j, sec, "threads", g.threads);
  if (j.contains("within_block_pairs")) {
    std::string s;
    read(j, sec, "within_block_pairs", s);
    g.pair_counting = parse_counting(s);
  }
  if (holdout) read(j, sec, "holdout", *holdout);
  if (init_path) read(j, sec, "init_path", *init_path);
}

inline RunConfig parse_run_config(const json& j) {
  using namespace config_detail;
  check_keys(j, "", {"seed", "gibbs", "synth", "predict", "data", "report"});
  RunConfig c;
  read(j, "", "seed", c.seed);
  c.gibbs.seed = c.seed;
  c.synth.seed = c.seed;
  if (j.contains("gibbs")) gibbs_from_json(j.at("gibbs"), c.gibbs, &c.holdout, &c.init_path);
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    const std::string sec = "synth";
    check_keys(s, sec, {"N", "B_true", "K", "T", "R", "H", "kappa", "pattern_mix", "amplitude", "assignment",
                        "no_blocks", "seed"});
    read(s, sec, "N", c.synth.nodes);
    read(s, sec, "B_true", c.synth.blocks);
    read(s, sec, "K", c.synth.layers);
    read(s, sec, "T", c.synth.steps);
    read(s, sec, "R", c.synth.cross_dims);
    read(s, sec, "H", c.synth.within_dims);
    read(s, sec, "kappa", c.synth.smoothness);
    read(s, sec, "amplitude", c.synth.amplitude);
    read(s, sec, "no_blocks", c.synth.no_blocks);
    read(s, sec, "seed", c.synth.seed);
    if (s.contains("pattern_mix")) {
      std::vector<double> mix;
      read(s, sec, "pattern_mix", mix);
      require(mix.size() == 3, "config: synth.pattern_mix needs three weights (constant, seasonal, trend)");
      c.synth.pattern_mix = {mix[0], mix[1], mix[2]};
    }
    if (s.contains("assignment")) {
      std::string a;
      read(s, sec, "assignment", a);
      if (a == "balanced")
        c.synth.scheme = AssignmentScheme::balanced;
      else if (a == "dirichlet")
        c.synth.scheme = AssignmentScheme::dirichlet;
      else
        throw ValidationError("config: synth.assignment must be `balanced` or `dirichlet`");
    }
  }
  if (j.contains("predict")) {
    const auto& p = j.at("predict");
    const std::string sec = "predict";
    check_keys(p, sec, {"horizon", "stamps", "impute", "max_draws"});
    read(p, sec, "horizon", c.predict.horizon);
    read(p, sec, "stamps", c.predict.stamps);
    read(p, sec, "impute", c.predict.impute);
    read(p, sec, "max_draws", c.predict.max_draws);
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    const std::string sec = "data";
    check_keys(d, sec, {"N", "K", "T", "times_path", "names_path"});
    read(d, sec, "N", c.data.nodes);
    read(d, sec, "K", c.data.layers);
    read(d, sec, "T", c.data.steps);
    read(d, sec, "times_path", c.data.times_path);
    read(d, sec, "names_path", c.data.names_path);
  }
  if (j.contains("report")) {
    const auto& r = j.at("report");
    check_keys(r, "report", {"clusters"});
    read(r, "report", "clusters", c.report_clusters);
  }
  return c;
}

// Keys that must be present for `simulate`.
inline void require_synth_keys(const json& j) {
  if (!j.contains("synth")) throw ValidationError("config: missing required section `synth`");
  const auto& s = j.at("synth");
  if (!s.contains("N")) throw ValidationError("config: missing required key `synth.N`");
  const bool no_blocks = s.contains("no_blocks") && s.at("no_blocks").is_boolean() && s.at("no_blocks").get<bool>();
  if (!no_blocks && !s.contains("B_true")) throw ValidationError("config: missing required key `synth.B_true`");
}

inline json synth_to_json(const SynthConfig& s) {
  return {{"N", s.nodes},
          {"B_true", s.blocks},
          {"K", s.layers},
          {"T", s.steps},
          {"R", s.cross_dims},
          {"H", s.within_dims},
          {"kappa", s.smoothness},
          {"pattern_mix", {s.pattern_mix[0], s.pattern_mix[1], s.pattern_mix[2]}},
          {"amplitude", s.amplitude},
          {"assignment", s.scheme == AssignmentScheme::balanced ? "balanced" : "dirichlet"},
          {"no_blocks", s.no_blocks},
          {"seed", s.seed}};
}

// Fully resolved echo; parse_run_config(run_config_to_json(c)) reproduces c.
inline json run_config_to_json(const RunConfig& c) {
  json g = gibbs_to_json(c.gibbs);
  g["holdout"] = c.holdout;
  g["init_path"] = c.init_path;
  return {{"seed", c.seed},
          {"gibbs", g},
          {"synth", synth_to_json(c.synth)},
          {"predict",
           {{"horizon", c.predict.horizon},
            {"stamps", c.predict.stamps},
            {"impute", c.predict.impute},
            {"max_draws", c.predict.max_draws}}},
          {"data",
           {{"N", c.data.nodes},
            {"K", c.data.layers},
            {"T", c.data.steps},
            {"times_path", c.data.times_path},
            {"names_path", c.data.names_path}}},
          {"report", {{"clusters", c.report_clusters}}}};
}

// Applies `a.b.c=value`; value is parsed as JSON when possible, else kept as a string.
inline void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got `" + assignment + "`");
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ValidationError("--set: empty key segment in `" + path + "`");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config: " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace dmbn
