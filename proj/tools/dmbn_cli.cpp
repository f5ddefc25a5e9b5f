// dmbn: simulate, fit, predict, evaluate and report dynamic multilayer block networks.

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "dmbn.hpp"

namespace {

using namespace dmbn;
namespace fs = std::filesystem;

struct Options {
  std::string config, data, out, trace, preds, truth, mode = "dmbn";
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<long long> horizon;
  std::size_t chains = 1;
  bool impute = false;
};

struct Loaded {
  json raw;
  RunConfig run;
};

Loaded load_config(const Options& o) {
  Loaded l;
  l.raw = o.config.empty() ? json::object() : load_json_file(o.config);
  for (const auto& s : o.sets) apply_override(l.raw, s);
  l.run = parse_run_config(l.raw);
  if (o.seed) l.run.seed = l.run.gibbs.seed = l.run.synth.seed = *o.seed;
  return l;
}

std::ofstream create(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

std::ifstream open(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot read " + p.string());
  return is;
}

void write_json(const fs::path& p, const json& j) { create(p) << j.dump(2) << '\n'; }

fs::path require_out(const Options& o, const char* cmd) {
  if (o.out.empty()) throw ValidationError(std::string(cmd) + ": --out is required");
  fs::create_directories(o.out);
  return o.out;
}

// ---------------------------------------------------------------------------
// Data loading

struct EdgeDims {
  std::size_t nodes = 0, layers = 0, steps = 0;
};

// Largest indices in an edge list; malformed rows are left for the loader to report.
EdgeDims scan_edge_dims(const fs::path& p) {
  auto in = open(p);
  CsvReader reader(in);
  std::vector<std::string> f;
  EdgeDims d;
  while (reader.next(f)) {
    long long v[4];
    if (f.size() != 4) continue;
    bool ok = true;
    for (int c = 0; c < 4; ++c) ok = ok && parse_integer(f[c], v[c]) && v[c] >= 1;
    if (!ok) continue;
    d.steps = std::max<std::size_t>(d.steps, v[0]);
    d.layers = std::max<std::size_t>(d.layers, v[1]);
    d.nodes = std::max<std::size_t>({d.nodes, static_cast<std::size_t>(v[2]), static_cast<std::size_t>(v[3])});
  }
  return d;
}

struct Dataset {
  AdjacencyTensor a;
  fs::path path;
};

// Dimensions come from the config, else from a simulate manifest beside the
// edge list, else from the largest indices present.
Dataset load_dataset(const fs::path& path, const DataOptions& opt) {
  if (!fs::exists(path)) throw IoError("data file not found: " + path.string());
  EdgeDims d{opt.nodes, opt.layers, opt.steps};
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  if ((!d.nodes || !d.layers || !d.steps) && fs::exists(dir / "manifest.json")) {
    try {
      const json m = json::parse(open(dir / "manifest.json"));
      if (m.contains("dims")) {
        const auto& md = m.at("dims");
        if (!d.nodes) d.nodes = md.value("N", std::size_t{0});
        if (!d.layers) d.layers = md.value("K", std::size_t{0});
        if (!d.steps) d.steps = md.value("T", std::size_t{0});
      }
    } catch (const json::exception&) {
    }
  }
  if (!d.nodes || !d.layers || !d.steps) {
    const auto s = scan_edge_dims(path);
    if (!d.nodes) d.nodes = s.nodes;
    if (!d.layers) d.layers = s.layers;
    if (!d.steps) d.steps = s.steps;
  }
  if (!d.nodes || !d.layers || !d.steps) throw ValidationError("data: cannot determine N, K, T; set data.N/K/T");

  std::vector<double> times;
  fs::path times_path = opt.times_path;
  if (times_path.empty() && fs::exists(dir / "times.csv")) times_path = dir / "times.csv";
  if (!times_path.empty()) {
    auto in = open(times_path);
    times = load_times(in, d.steps);
  }
  auto in = open(path);
  Dataset out{load_edge_list(in, d.nodes, d.layers, d.steps, std::move(times)), fs::absolute(path)};
  if (!opt.names_path.empty()) {
    auto nin = open(opt.names_path);
    out.a.node_names = load_node_names(nin, d.nodes);
  }
  return out;
}

// A trace directory, or a directory of chain_<m> traces pooled in chain order.
struct LoadedTrace {
  PosteriorTrace trace;
  json manifest;
  std::size_t chains = 1;
};

LoadedTrace load_traces(const fs::path& dir) {
  if (dir.empty()) throw ValidationError("--trace is required");
  if (!fs::is_directory(dir)) throw IoError("trace directory not found: " + dir.string());
  LoadedTrace out;
  if (fs::exists(dir / "manifest.json")) {
    out.trace = read_trace(dir);
    out.manifest = json::parse(open(dir / "manifest.json"));
    return out;
  }
  std::vector<fs::path> chains;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && e.path().filename().string().rfind("chain_", 0) == 0 && fs::exists(e.path() / "manifest.json"))
      chains.push_back(e.path());
  if (chains.empty()) throw ValidationError("trace: no manifest.json in " + dir.string());
  std::sort(chains.begin(), chains.end(), [](const fs::path& a, const fs::path& b) {
    return std::stoul(a.filename().string().substr(6)) < std::stoul(b.filename().string().substr(6));
  });
  out.trace = read_trace(chains.front());
  out.manifest = json::parse(open(chains.front() / "manifest.json"));
  for (std::size_t c = 1; c < chains.size(); ++c) {
    auto more = read_trace(chains[c]);
    require(more.dims == out.trace.dims && more.nodes == out.trace.nodes && more.times == out.trace.times,
            "trace: chains disagree on dimensions");
    for (auto& r : more.records) out.trace.records.push_back(std::move(r));
  }
  out.chains = chains.size();
  return out;
}

std::vector<double> full_times(const LoadedTrace& t) {
  if (t.manifest.contains("data") && t.manifest["data"].contains("times"))
    return t.manifest["data"]["times"].get<std::vector<double>>();
  return t.trace.times;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_simulate(const Options& o) {
  if (o.config.empty() && o.sets.empty()) throw ValidationError("simulate: --config is required");
  auto cfg = load_config(o);
  require_synth_keys(cfg.raw);
  const auto out = require_out(o, "simulate");
  const auto& sc = cfg.run.synth;
  const SynthData sim = generate(sc);
  {
    auto os = create(out / "edges.csv");
    write_edge_list(os, sim.data);
  }
  {
    auto os = create(out / "times.csv");
    write_times(os, sim.data.times());
  }
  write_ground_truth(out, sim.theta, sim.z);
  write_json(out / "manifest.json",
             {{"command", "simulate"},
              {"dims", {{"N", sc.nodes}, {"K", sc.layers}, {"T", sc.steps}, {"B_true", sc.effective_blocks()}}},
              {"files", {"edges.csv", "times.csv", "truth_theta.csv", "truth_z.csv"}},
              {"config", run_config_to_json(cfg.run)}});
  std::cout << "simulated N=" << sc.nodes << " K=" << sc.layers << " T=" << sc.steps << " into " << out.string()
            << '\n';
  return 0;
}

int cmd_fit(const Options& o) {
  auto cfg = load_config(o);
  if (o.data.empty()) throw ValidationError("fit: --data is required");
  const auto out = require_out(o, "fit");
  const Dataset ds = load_dataset(o.data, cfg.run.data);
  const auto& a = ds.a;
  const auto holdout = cfg.run.holdout;
  if (holdout >= a.steps()) throw ValidationError("fit: gibbs.holdout must leave at least one time step");
  const AdjacencyTensor train = holdout ? a.head(a.steps() - holdout) : a;

  GibbsConfig g = cfg.run.gibbs;
  if (!cfg.run.init_path.empty()) {
    auto in = open(cfg.run.init_path);
    g.initial_z = read_assignments(in, a.nodes());
  }
  if (o.mode == "dmn")
    g = dmn_config(a.nodes(), g);
  else if (o.mode != "dmbn")
    throw ValidationError("--mode must be dmbn or dmn");
  if (o.chains < 1) throw ValidationError("--chains must be >= 1");
  g.validate(a.nodes());

  std::vector<PosteriorTrace> traces(o.chains);
  auto fit_one = [&](std::size_t m) {
    GibbsConfig gc = g;
    gc.seed = g.seed + m;
    if (o.chains > 1 && gc.threads == 0) gc.threads = std::max(1, default_threads() / static_cast<int>(o.chains));
    traces[m] = run_chain(train, gc);
  };
  if (o.chains == 1) {
    fit_one(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(o.chains);
    for (std::size_t m = 0; m < o.chains; ++m)
      pool.emplace_back([&, m] {
        try {
          fit_one(m);
        } catch (...) {
          errors[m] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  json data = {{"path", ds.path.string()},
               {"N", a.nodes()},
               {"K", a.layers()},
               {"T", a.steps()},
               {"times", a.times()},
               {"holdout", holdout}};
  for (std::size_t m = 0; m < o.chains; ++m) {
    const fs::path dir = o.chains == 1 ? out : out / ("chain_" + std::to_string(m));
    write_trace(dir, traces[m],
                {{"command", "fit"},
                 {"mode", o.mode},
                 {"chain", m},
                 {"data", data},
                 {"run_config", run_config_to_json(cfg.run)}});
    const auto& tr = traces[m];
    std::cout << "chain " << m << ": " << tr.records.size() << " draws, wall " << tr.wall_seconds << " s\n";
    for (std::size_t s = 0; s < kStepNames.size(); ++s)
      std::cout << "  step " << s + 1 << " (" << kStepNames[s] << "): " << tr.timings.seconds[s] << " s\n";
  }
  return 0;
}

int cmd_predict(const Options& o) {
  auto cfg = load_config(o);
  const auto out = require_out(o, "predict");
  const auto lt = load_traces(o.trace.empty() ? o.data : o.trace);
  const auto& tr = lt.trace;

  std::vector<double> stamps;
  const bool horizon_given =
      o.horizon.has_value() || (cfg.raw.contains("predict") && cfg.raw["predict"].contains("horizon"));
  if (horizon_given) {
    const long long h = o.horizon ? *o.horizon : static_cast<long long>(cfg.run.predict.horizon);
    if (h < 1) throw ValidationError("predict: horizon must be >= 1");
    const auto& t = tr.times;
    const double step = t.size() >= 2 ? t[t.size() - 1] - t[t.size() - 2] : 1.0;
    for (long long s = 1; s <= h; ++s) stamps.push_back(t.back() + step * static_cast<double>(s));
  } else if (!cfg.run.predict.stamps.empty()) {
    stamps = cfg.run.predict.stamps;
  } else {
    throw ValidationError("predict: give --horizon or predict.stamps");
  }

  PredictionSpec spec;
  spec.stamps = stamps;
  spec.impute = o.impute || cfg.run.predict.impute;
  spec.keep_draws = false;
  const auto n = tr.records.size(), want = cfg.run.predict.max_draws;
  if (want > 0 && want < n)
    for (std::size_t i = 0; i < want; ++i) spec.draws.push_back(i * n / want);
  const bool kernels_given = cfg.raw.contains("gibbs");
  const ModelKernels kernels = kernels_given ? cfg.run.gibbs.kernels : tr.config.kernels;
  Rng rng = Rng::keyed(cfg.run.seed, {0x7072656463ULL});
  const Forecast f = predict_edge_probs(tr, spec, kernels, rng);

  // Time labels follow the original data's numbering where a stamp is known.
  const auto all = full_times(lt);
  std::vector<std::size_t> index;
  std::size_t extra = 0;
  for (double s : stamps) {
    const auto it = std::find(all.begin(), all.end(), s);
    index.push_back(it != all.end() ? static_cast<std::size_t>(it - all.begin()) + 1 : all.size() + ++extra);
  }
  {
    auto os = create(out / "preds.csv");
    write_predictions(os, f.theta, index);
  }
  write_json(out / "manifest.json", {{"command", "predict"},
                                     {"trace", fs::absolute(o.trace.empty() ? o.data : o.trace).string()},
                                     {"stamps", stamps},
                                     {"t", index},
                                     {"draws", spec.draws.empty() ? n : spec.draws.size()},
                                     {"impute", spec.impute},
                                     {"config", run_config_to_json(cfg.run)}});
  std::cout << "predicted " << stamps.size() << " stamps from " << (spec.draws.empty() ? n : spec.draws.size())
            << " draws\n";
  return 0;
}

bool is_probability_table(const fs::path& p) {
  auto in = open(p);
  CsvReader reader(in);
  std::vector<std::string> f;
  if (!reader.next(f)) throw ValidationError("eval: truth file " + p.string() + " is empty");
  return f.size() == 5;
}

void write_roc(const fs::path& p, const RocResult& r) {
  auto os = create(p);
  os << "fpr,tpr,threshold\n";
  for (const auto& pt : r.curve)
    os << format_real(pt.fpr) << ',' << format_real(pt.tpr) << ',' << format_real(pt.threshold) << '\n';
}

int cmd_eval(const Options& o) {
  auto cfg = load_config(o);
  const fs::path preds_path = o.preds.empty() ? o.data : o.preds;
  if (preds_path.empty()) throw ValidationError("eval: --preds is required");
  if (o.truth.empty()) throw ValidationError("eval: --truth is required");
  const auto out = require_out(o, "eval");
  std::vector<PredictionRow> rows;
  {
    auto in = open(preds_path);
    rows = read_predictions(in);
  }
  if (rows.empty()) throw ValidationError("eval: no predictions");
  std::size_t nodes = 0, layers = 0, steps = 0;
  for (const auto& r : rows) {
    nodes = std::max({nodes, r.i, r.j});
    layers = std::max(layers, r.layer);
    steps = std::max(steps, r.t);
  }
  if (cfg.run.data.nodes) nodes = std::max(nodes, cfg.run.data.nodes);

  const bool theta_truth = is_probability_table(o.truth);
  std::vector<double> truth(rows.size());
  if (theta_truth) {
    std::size_t tk = 0, tn = 0, tt = 0;
    {
      auto in = open(o.truth);
      CsvReader reader(in);
      std::vector<std::string> f;
      while (reader.next(f)) {
        long long v[4];
        bool ok = f.size() == 5;
        for (int c = 0; ok && c < 4; ++c) ok = parse_integer(f[c], v[c]) && v[c] >= 1;
        if (!ok) continue;
        tt = std::max<std::size_t>(tt, v[0]);
        tk = std::max<std::size_t>(tk, v[1]);
        tn = std::max<std::size_t>({tn, static_cast<std::size_t>(v[2]), static_cast<std::size_t>(v[3])});
      }
    }
    if (tk != layers)
      throw ValidationError("eval: layer count mismatch (predictions " + std::to_string(layers) + ", truth " +
                            std::to_string(tk) + ")");
    if (tt < steps || tn < nodes) throw ValidationError("eval: predictions index beyond the truth table");
    auto in = open(o.truth);
    const auto theta = read_probability_table(in, tn, tk, tt);
    for (std::size_t r = 0; r < rows.size(); ++r)
      truth[r] = theta(rows[r].t - 1, rows[r].layer - 1, rows[r].i - 1, rows[r].j - 1);
  } else {
    const auto d = scan_edge_dims(o.truth);
    const std::size_t tk = cfg.run.data.layers ? cfg.run.data.layers : d.layers;
    if (tk > layers || (cfg.run.data.layers && tk != layers))
      throw ValidationError("eval: layer count mismatch (predictions " + std::to_string(layers) + ", truth " +
                            std::to_string(tk) + ")");
    const std::size_t tn = std::max(nodes, d.nodes);
    const std::size_t tt = std::max({steps, d.steps, cfg.run.data.steps});
    auto in = open(o.truth);
    const auto a = load_edge_list(in, tn, layers, tt);
    for (std::size_t r = 0; r < rows.size(); ++r)
      truth[r] = a(rows[r].t - 1, rows[r].layer - 1, rows[r].i - 1, rows[r].j - 1);
  }

  json metrics = {{"pairs", rows.size()}, {"truth", theta_truth ? "probabilities" : "edges"}};
  double abs_err = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) abs_err += std::fabs(rows[r].prob - truth[r]);
  metrics["mae"] = abs_err / static_cast<double>(rows.size());

  // Density and mean degree per (t, layer).
  std::map<std::pair<std::size_t, std::size_t>, std::array<double, 3>> cell;  // sum pred, sum truth, pairs
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& c = cell[{rows[r].t, rows[r].layer}];
    c[0] += rows[r].prob;
    c[1] += truth[r];
    c[2] += 1.0;
  }
  json dens = json::array(), deg = json::array();
  for (const auto& [key, c] : cell) {
    const double pairs = c[2];
    dens.push_back({{"t", key.first}, {"layer", key.second}, {"predicted", c[0] / pairs}, {"observed", c[1] / pairs}});
    deg.push_back({{"t", key.first},
                   {"layer", key.second},
                   {"predicted", 2.0 * c[0] / static_cast<double>(nodes)},
                   {"observed", 2.0 * c[1] / static_cast<double>(nodes)}});
  }
  metrics["density"] = dens;
  metrics["mean_degree"] = deg;

  if (!theta_truth) {
    auto auc_of = [&](std::optional<std::size_t> layer) -> json {
      std::vector<double> s;
      std::vector<int> lab;
      for (std::size_t r = 0; r < rows.size(); ++r)
        if (!layer || rows[r].layer == *layer) {
          s.push_back(rows[r].prob);
          lab.push_back(truth[r] > 0.5 ? 1 : 0);
        }
      try {
        const auto roc = roc_auc(s, lab);
        write_roc(out / (layer ? "roc_" + std::to_string(*layer) + ".csv" : std::string("roc_all.csv")), roc);
        return roc.auc;
      } catch (const ValidationError&) {
        return nullptr;  // a single class: AUC undefined
      }
    };
    json by_layer = json::object();
    for (std::size_t k = 1; k <= layers; ++k) by_layer[std::to_string(k)] = auc_of(k);
    metrics["auc"] = {{"overall", auc_of(std::nullopt)}, {"by_layer", by_layer}};
  }
  write_json(out / "metrics.json", metrics);
  std::cout << "mae " << metrics["mae"].get<double>();
  if (metrics.contains("auc") && !metrics["auc"]["overall"].is_null())
    std::cout << ", auc " << metrics["auc"]["overall"].get<double>();
  std::cout << '\n';
  return 0;
}

int cmd_report(const Options& o) {
  auto cfg = load_config(o);
  const auto out = require_out(o, "report");
  const auto lt = load_traces(o.trace.empty() ? o.data : o.trace);
  const auto& tr = lt.trace;
  const auto theta = posterior_mean_theta(tr);
  const auto N = tr.nodes, K = tr.dims.layers, T = tr.dims.steps;

  std::optional<AdjacencyTensor> observed;
  if (lt.manifest.contains("data") && lt.manifest["data"].contains("path")) {
    const fs::path p = lt.manifest["data"]["path"].get<std::string>();
    if (fs::exists(p)) {
      DataOptions d = cfg.run.data;
      d.nodes = N;
      d.layers = K;
      d.steps = lt.manifest["data"].value("T", T);
      const auto ds = load_dataset(p, d);
      observed = ds.a.head(T);
    }
  }

  {
    auto os = create(out / "density.csv");
    os << "t,stamp,layer,estimated,observed\n";
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t k = 0; k < K; ++k) {
        os << t + 1 << ',' << format_real(tr.times[t]) << ',' << k + 1 << ',' << format_real(density(theta, k, t))
           << ',';
        if (observed) os << format_real(density(*observed, k, t));
        os << '\n';
      }
  }
  {
    auto os = create(out / "degree.csv");
    os << "t,layer,i,estimated,observed\n";
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < N; ++i) {
          os << t + 1 << ',' << k + 1 << ',' << i + 1 << ',' << format_real(expected_degree(theta, i, k, t)) << ',';
          if (observed) {
            std::size_t d = 0;
            for (std::size_t j = 0; j < N; ++j) d += (*observed)(t, k, i, j);
            os << d;
          }
          os << '\n';
        }
  }
  std::vector<std::vector<int>> draws;
  for (const auto& r : tr.records) draws.push_back(r.z);
  const auto c = coclustering(draws);
  {
    auto os = create(out / "coclustering.csv");
    os << "i";
    for (std::size_t j = 0; j < N; ++j) os << ",j" << j + 1;
    os << '\n';
    for (std::size_t i = 0; i < N; ++i) {
      os << i + 1;
      for (std::size_t j = 0; j < N; ++j) os << ',' << format_real(c(i, j));
      os << '\n';
    }
  }
  const std::size_t clusters = cfg.run.report_clusters ? cfg.run.report_clusters : modal_occupied_blocks(draws);
  const auto labels = consensus_partition(c, clusters);
  std::vector<std::string> names;
  if (!cfg.run.data.names_path.empty()) {
    auto in = open(cfg.run.data.names_path);
    names = load_node_names(in, N);
  }
  {
    auto os = create(out / "clusters.csv");
    os << "node,cluster" << (names.empty() ? "" : ",name") << '\n';
    for (std::size_t i = 0; i < N; ++i) {
      os << i + 1 << ',' << labels[i] + 1;
      if (!names.empty()) os << ',' << names[i];
      os << '\n';
    }
  }
  write_json(out / "manifest.json", {{"command", "report"},
                                     {"trace", fs::absolute(o.trace.empty() ? o.data : o.trace).string()},
                                     {"draws", tr.records.size()},
                                     {"chains", lt.chains},
                                     {"clusters", clusters},
                                     {"dims", {{"N", N}, {"K", K}, {"T", T}}},
                                     {"config", run_config_to_json(cfg.run)}});
  std::cout << "report: " << tr.records.size() << " draws, " << clusters << " clusters\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic multilayer block network sampler"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "JSON configuration file");
    s->add_option("--set", o.sets, "Override a config key, e.g. gibbs.B=5")->take_all();
    s->add_option("--seed", o.seed, "Base random seed");
    s->add_option("--out", o.out, "Output directory");
  };
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic network with ground truth");
  common(sim);
  auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler and write a trace directory");
  common(fit);
  fit->add_option("--data", o.data, "Edge list CSV (t,layer,i,j)");
  fit->add_option("--mode", o.mode, "dmbn or dmn")->check(CLI::IsMember({"dmbn", "dmn"}));
  fit->add_option("--chains", o.chains, "Independent chains run in parallel");
  auto* pred = app.add_subcommand("predict", "Forecast or impute edge probabilities");
  common(pred);
  pred->add_option("--trace,--data", o.trace, "Trace directory");
  pred->add_option("--horizon", o.horizon, "Number of future steps");
  pred->add_flag("--impute", o.impute, "Allow stamps inside the training grid");
  auto* ev = app.add_subcommand("eval", "Score predictions against a truth file");
  common(ev);
  ev->add_option("--preds,--data", o.preds, "Predictions CSV (t,layer,i,j,prob)");
  ev->add_option("--truth", o.truth, "Truth edge list or probability table");
  auto* rep = app.add_subcommand("report", "Densities, degrees and clusters from a trace");
  common(rep);
  rep->add_option("--trace,--data", o.trace, "Trace directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*fit) return cmd_fit(o);
    if (*pred) return cmd_predict(o);
    if (*ev) return cmd_eval(o);
    if (*rep) return cmd_report(o);
  } catch (const dmbn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
