#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmbn/config.hpp"
#include "dmbn/csv.hpp"
#include "dmbn/error.hpp"
#include "dmbn/gibbs.hpp"

namespace dmbn {

namespace fs = std::filesystem;

namespace trace_detail {

// A parameter group: column names plus accessors into a record, in a fixed order.
struct Group {
  const char* file;
  std::vector<std::string> columns;
  std::function<double*(TraceRecord&)> base;  // start of the contiguous block
};

inline std::string label(std::initializer_list<std::pair<char, std::size_t>> parts) {
  std::string s;
  for (const auto& [c, v] : parts) {
    if (!s.empty()) s += '_';
    s += c;
    s += std::to_string(v + 1);
  }
  return s;
}

// Columns follow the row-major storage of each tensor.
inline std::vector<Group> groups(const ModelDims& d) {
  std::vector<Group> g;
  {
    Group x{"mu.csv", {}, [](TraceRecord& r) { return r.latent.mu.data(); }};
    for (std::size_t t = 0; t < d.steps; ++t) x.columns.push_back(label({{'t', t}}));
    g.push_back(std::move(x));
  }
  {
    Group x{"mu_pk.csv", {}, [](TraceRecord& r) { return r.latent.mu_block.data(); }};
    for (std::size_t p = 0; p < d.blocks; ++p)
      for (std::size_t k = 0; k < d.layers; ++k)
        for (std::size_t t = 0; t < d.steps; ++t) x.columns.push_back(label({{'p', p}, {'k', k}, {'t', t}}));
    g.push_back(std::move(x));
  }
  {
    Group x{"xbar.csv", {}, [](TraceRecord& r) { return r.latent.xbar.data(); }};
    for (std::size_t p = 0; p < d.blocks; ++p)
      for (std::size_t r = 0; r < d.cross_dims; ++r)
        for (std::size_t t = 0; t < d.steps; ++t) x.columns.push_back(label({{'p', p}, {'r', r}, {'t', t}}));
    g.push_back(std::move(x));
  }
  {
    Group x{"x.csv", {}, [](TraceRecord& r) { return r.latent.x.data(); }};
    for (std::size_t p = 0; p < d.blocks; ++p)
      for (std::size_t k = 0; k < d.layers; ++k)
        for (std::size_t h = 0; h < d.within_dims; ++h)
          for (std::size_t t = 0; t < d.steps; ++t)
            x.columns.push_back(label({{'p', p}, {'k', k}, {'h', h}, {'t', t}}));
    g.push_back(std::move(x));
  }
  {
    Group x{"delta.csv", {}, [](TraceRecord& r) { return r.latent.delta.data(); }};
    for (std::size_t r = 0; r < d.cross_dims; ++r) x.columns.push_back(label({{'r', r}}));
    g.push_back(std::move(x));
  }
  {
    Group x{"delta_k.csv", {}, [](TraceRecord& r) { return r.latent.delta_within.data(); }};
    for (std::size_t k = 0; k < d.layers; ++k)
      for (std::size_t h = 0; h < d.within_dims; ++h) x.columns.push_back(label({{'k', k}, {'h', h}}));
    g.push_back(std::move(x));
  }
  {
    Group x{"eta.csv", {}, [](TraceRecord& r) { return r.eta.data(); }};
    for (std::size_t p = 0; p < d.blocks; ++p) x.columns.push_back(label({{'p', p}}));
    g.push_back(std::move(x));
  }
  return g;
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot read " + p.string());
  return is;
}

}  // namespace trace_detail

inline json manifest_json(const PosteriorTrace& tr) {
  json iters = json::array();
  for (const auto& r : tr.records) iters.push_back(r.iteration);
  return {{"format", "dmbn-trace"},
          {"version", 1},
          {"dims",
           {{"N", tr.nodes},
            {"B", tr.dims.blocks},
            {"K", tr.dims.layers},
            {"T", tr.dims.steps},
            {"R", tr.dims.cross_dims},
            {"H", tr.dims.within_dims}}},
          {"times", tr.times},
          {"config", gibbs_to_json(tr.config)},
          {"records", tr.records.size()},
          {"iterations", iters}};
}

inline json timing_json(const PosteriorTrace& tr) {
  json steps = json::object();
  for (std::size_t i = 0; i < kStepNames.size(); ++i) steps[kStepNames[i]] = tr.timings.seconds[i];
  return {{"wall_seconds", tr.wall_seconds},
          {"sampler_seconds", tr.timings.total()},
          {"iterations", tr.config.iterations},
          {"seconds_per_iteration",
           tr.config.iterations ? tr.wall_seconds / static_cast<double>(tr.config.iterations) : 0.0},
          {"steps", steps}};
}

// Writes the trace directory. `extra` is merged into the manifest (run echo, data paths).
inline void write_trace(const fs::path& dir, const PosteriorTrace& tr, const json& extra = json::object()) {
  using namespace trace_detail;
  fs::create_directories(dir);
  json manifest = manifest_json(tr);
  for (const auto& [k, v] : extra.items()) manifest[k] = v;
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
  open_out(dir / "timing.json") << timing_json(tr).dump(2) << '\n';

  for (const auto& g : groups(tr.dims)) {
    auto os = open_out(dir / g.file);
    os << "iteration";
    for (const auto& c : g.columns) os << ',' << c;
    os << '\n';
    for (const auto& rec : tr.records) {
      auto& r = const_cast<TraceRecord&>(rec);
      const double* v = g.base(r);
      os << rec.iteration;
      for (std::size_t i = 0; i < g.columns.size(); ++i) os << ',' << format_real(v[i]);
      os << '\n';
    }
  }
  auto zs = open_out(dir / "z.csv");
  zs << "iteration";
  for (std::size_t i = 0; i < tr.nodes; ++i) zs << ",i" << i + 1;
  zs << '\n';
  for (const auto& rec : tr.records) {
    zs << rec.iteration;
    for (int b : rec.z) zs << ',' << b + 1;
    zs << '\n';
  }
}

inline PosteriorTrace read_trace(const fs::path& dir) {
  using namespace trace_detail;
  json m;
  try {
    auto in = open_in(dir / "manifest.json");
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("trace: malformed manifest in " + dir.string() + ": " + e.what());
  }
  PosteriorTrace tr;
  std::vector<std::size_t> iters;
  try {
    if (m.value("format", "") != "dmbn-trace") throw ValidationError("trace: " + dir.string() + " is not a trace");
    const auto& d = m.at("dims");
    tr.nodes = d.at("N").get<std::size_t>();
    tr.dims = ModelDims{d.at("B").get<std::size_t>(), d.at("K").get<std::size_t>(), d.at("T").get<std::size_t>(),
                        d.at("R").get<std::size_t>(), d.at("H").get<std::size_t>()};
    tr.times = m.at("times").get<std::vector<double>>();
    gibbs_from_json(m.at("config"), tr.config);
    iters = m.at("iterations").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw ValidationError("trace: manifest missing fields: " + std::string(e.what()));
  }
  require(tr.times.size() == tr.dims.steps, "trace: times do not match T");
  tr.records.resize(iters.size());
  for (std::size_t i = 0; i < iters.size(); ++i) {
    tr.records[i].iteration = iters[i];
    tr.records[i].latent = LatentState(tr.dims);
    tr.records[i].eta.assign(tr.dims.blocks, 0.0);
    tr.records[i].z.assign(tr.nodes, 0);
  }

  auto read_rows = [&](const char* file, std::size_t width, auto&& store) {
    auto in = open_in(dir / file);
    std::string header;
    std::getline(in, header);
    CsvReader reader(in);
    std::vector<std::string> f;
    std::size_t row = 0;
    while (reader.next(f)) {
      if (row >= iters.size() || f.size() != width + 1)
        throw ValidationError(std::string("trace: unexpected shape in ") + file);
      long long it;
      if (!parse_integer(f[0], it) || static_cast<std::size_t>(it) != iters[row])
        throw ValidationError(std::string("trace: iteration ids in ") + file + " disagree with manifest");
      for (std::size_t c = 0; c < width; ++c) store(row, c, f[c + 1]);
      ++row;
    }
    if (row != iters.size()) throw ValidationError(std::string("trace: ") + file + " has too few rows");
  };

  for (const auto& g : groups(tr.dims)) {
    read_rows(g.file, g.columns.size(), [&](std::size_t row, std::size_t c, const std::string& s) {
      double v;
      if (!parse_real(s, v)) throw ValidationError(std::string("trace: bad number in ") + g.file);
      g.base(tr.records[row])[c] = v;
    });
  }
  read_rows("z.csv", tr.nodes, [&](std::size_t row, std::size_t c, const std::string& s) {
    long long b;
    if (!parse_integer(s, b) || b < 1 || b > static_cast<long long>(tr.dims.blocks))
      throw ValidationError("trace: bad block label in z.csv");
    tr.records[row].z[c] = static_cast<int>(b - 1);
  });
  return tr;
}

}  // namespace dmbn
