#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dmbn.hpp"

namespace fs = std::filesystem;
using dmbn::json;

namespace {

const fs::path& root() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "dmbn_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(DMBN_CLI_PATH) + " " + args + " >> " + (root() / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string p(const fs::path& x) { return x.string(); }

// N = 10, K = 2, T = 6 with B_true = 2, shared by the suite.
const fs::path& sim() {
  static const fs::path dir = [] {
    const auto d = root() / "sim";
    const int rc = run("simulate --set synth.N=10 synth.B_true=2 synth.K=2 synth.T=6 synth.R=2 synth.H=2 --seed 4 --out " +
                       p(d));
    EXPECT_EQ(rc, 0);
    return d;
  }();
  return dir;
}

const std::string kFitSet = "--set gibbs.iterations=40 gibbs.B=3 gibbs.R=2 gibbs.H=2 gibbs.threads=1";

const fs::path& fitted() {
  static const fs::path dir = [] {
    const auto d = root() / "fit";
    EXPECT_EQ(run("fit --data " + p(sim() / "edges.csv") + " " + kFitSet + " gibbs.holdout=2 --out " + p(d)), 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Cli, SimulateWritesDataAndTruth) {
  for (const char* f : {"edges.csv", "times.csv", "truth_theta.csv", "truth_z.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(sim() / f)) << f;
  EXPECT_EQ(lines(sim() / "truth_theta.csv"), 1u + 6 * 2 * 45);
  EXPECT_EQ(lines(sim() / "truth_z.csv"), 11u);
  const auto m = read_json(sim() / "manifest.json");
  EXPECT_EQ(m.at("dims").at("N"), 10);
  EXPECT_EQ(m.at("dims").at("B_true"), 2);
}

TEST(Cli, SimulateNeedsSizes) {
  EXPECT_EQ(run("simulate --set synth.N=10 --out " + p(root() / "bad_sim")), 2);
  EXPECT_EQ(run("simulate --out " + p(root() / "bad_sim")), 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("fit --bogus"), 2);
  EXPECT_EQ(run("fit --data /nonexistent/edges.csv --out " + p(root() / "x")), 4);
  EXPECT_EQ(run("fit --data " + p(sim() / "edges.csv") + " --set gibbs.iteration=3 --out " + p(root() / "x")), 2);
  EXPECT_EQ(run("fit --data " + p(sim() / "edges.csv") + " --config /nonexistent.json --out " + p(root() / "x")), 4);
  const auto bad = root() / "selfloop.csv";
  std::ofstream(bad) << "t,layer,i,j\n1,1,3,3\n";
  EXPECT_EQ(run("fit --data " + p(bad) + " --set data.N=4 data.K=1 data.T=1 --out " + p(root() / "x")), 2);
}

TEST(Cli, FitIsSeedDeterministic) {
  const auto a = root() / "det_a", b = root() / "det_b", c = root() / "det_c";
  const std::string base = "fit --data " + p(sim() / "edges.csv") + " " + kFitSet + " --seed 11 --out ";
  ASSERT_EQ(run(base + p(a)), 0);
  ASSERT_EQ(run(base + p(b)), 0);
  ASSERT_EQ(run("fit --data " + p(sim() / "edges.csv") + " " + kFitSet + " --seed 12 --out " + p(c)), 0);
  for (const char* f : {"mu.csv", "mu_pk.csv", "xbar.csv", "x.csv", "delta.csv", "delta_k.csv", "eta.csv", "z.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_NE(slurp(a / "mu.csv"), slurp(c / "mu.csv"));
}

TEST(Cli, FitManifestAndTiming) {
  const auto m = read_json(fitted() / "manifest.json");
  EXPECT_EQ(m.at("dims").at("T"), 4);  // two steps held out
  EXPECT_EQ(m.at("dims").at("B"), 3);
  EXPECT_EQ(m.at("records"), 32);
  EXPECT_EQ(m.at("mode"), "dmbn");
  const auto t = read_json(fitted() / "timing.json");
  EXPECT_GT(t.at("wall_seconds").get<double>(), 0.0);
  EXPECT_EQ(lines(fitted() / "z.csv"), 33u);
}

TEST(Cli, SingleIterationTrace) {
  const auto d = root() / "one";
  ASSERT_EQ(run("fit --data " + p(sim() / "edges.csv") + " " + kFitSet + " gibbs.iterations=1 gibbs.burnin=0 --out " +
                p(d)),
            0);
  EXPECT_EQ(read_json(d / "manifest.json").at("records"), 1);
  ASSERT_EQ(run("report --trace " + p(d) + " --out " + p(d / "report")), 0);
  EXPECT_EQ(lines(d / "report" / "clusters.csv"), 11u);
}

TEST(Cli, DmnModeUsesIdentityBlocks) {
  const auto d = root() / "dmn";
  ASSERT_EQ(run("fit --mode dmn --data " + p(sim() / "edges.csv") + " " + kFitSet + " --out " + p(d)), 0);
  const auto m = read_json(d / "manifest.json");
  EXPECT_EQ(m.at("dims").at("B"), 10);
  EXPECT_EQ(m.at("config").at("fixed_assignments"), true);
  const auto tr = dmbn::read_trace(d);
  for (const auto& r : tr.records)
    for (std::size_t i = 0; i < 10; ++i) ASSERT_EQ(r.z[i], static_cast<int>(i));
}

TEST(Cli, PredictHorizon) {
  const auto d = fitted() / "pred";
  ASSERT_EQ(run("predict --trace " + p(fitted()) + " --horizon 2 --out " + p(d)), 0);
  EXPECT_EQ(lines(d / "preds.csv"), 1u + 2 * 2 * 45);
  const auto rows = [&] {
    std::ifstream in(d / "preds.csv");
    return dmbn::read_predictions(in);
  }();
  EXPECT_EQ(rows.front().t, 5u);
  EXPECT_EQ(rows.back().t, 6u);
  EXPECT_EQ(run("predict --trace " + p(fitted()) + " --horizon 0 --out " + p(d)), 2);
  EXPECT_EQ(run("predict --trace " + p(fitted()) + " --out " + p(d)), 2);
}

TEST(Cli, PredictOverlapNeedsImpute) {
  const auto d = fitted() / "impute";
  EXPECT_EQ(run("predict --trace " + p(fitted()) + " --set predict.stamps=[2,3] --out " + p(d)), 2);
  ASSERT_EQ(run("predict --trace " + p(fitted()) + " --set predict.stamps=[2,3] --impute --out " + p(d)), 0);
  EXPECT_EQ(lines(d / "preds.csv"), 1u + 2 * 2 * 45);
}

TEST(Cli, PredictRejectsKernelMismatch) {
  EXPECT_EQ(run("predict --trace " + p(fitted()) + " --horizon 1 --set gibbs.kappa=0.5 --out " +
                p(fitted() / "mismatch")),
            2);
}

TEST(Cli, EvalHoldoutAgainstEdges) {
  const auto d = fitted() / "pred_eval";
  ASSERT_EQ(run("predict --trace " + p(fitted()) + " --horizon 2 --out " + p(d)), 0);
  ASSERT_EQ(run("eval --preds " + p(d / "preds.csv") + " --truth " + p(sim() / "edges.csv") + " --out " + p(d)), 0);
  const auto m = read_json(d / "metrics.json");
  EXPECT_EQ(m.at("pairs"), 180);
  EXPECT_EQ(m.at("truth"), "edges");
  const double auc = m.at("auc").at("overall").get<double>();
  EXPECT_GE(auc, 0.0);
  EXPECT_LE(auc, 1.0);
  EXPECT_TRUE(fs::exists(d / "roc_all.csv"));
  EXPECT_TRUE(fs::exists(d / "roc_1.csv"));
}

TEST(Cli, EvalPerfectAndSelf) {
  const auto d = root() / "eval_hand";
  fs::create_directories(d);
  std::ofstream(d / "edges.csv") << "t,layer,i,j\n1,1,1,2\n1,1,3,4\n";
  std::ofstream(d / "preds.csv") << "t,layer,i,j,prob\n1,1,1,2,0.9\n1,1,1,3,0.1\n1,1,1,4,0.2\n1,1,2,3,0.3\n"
                                    "1,1,2,4,0.1\n1,1,3,4,0.8\n";
  ASSERT_EQ(run("eval --preds " + p(d / "preds.csv") + " --truth " + p(d / "edges.csv") + " --out " + p(d)), 0);
  EXPECT_EQ(read_json(d / "metrics.json").at("auc").at("overall"), 1.0);

  ASSERT_EQ(run("eval --preds " + p(sim() / "truth_theta.csv") + " --truth " + p(sim() / "truth_theta.csv") +
                " --out " + p(d / "self")),
            0);
  const auto m = read_json(d / "self" / "metrics.json");
  EXPECT_EQ(m.at("mae"), 0.0);
  EXPECT_EQ(m.at("truth"), "probabilities");

  std::ofstream(d / "theta_k2.csv") << "t,layer,i,j,prob\n1,1,1,2,0.5\n1,2,1,2,0.5\n";
  EXPECT_EQ(run("eval --preds " + p(d / "preds.csv") + " --truth " + p(d / "theta_k2.csv") + " --out " + p(d)), 2);
}

TEST(Cli, ReportOutputs) {
  const auto d = fitted() / "report";
  ASSERT_EQ(run("report --trace " + p(fitted()) + " --out " + p(d)), 0);
  for (const char* f : {"density.csv", "degree.csv", "coclustering.csv", "clusters.csv"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
  EXPECT_EQ(lines(d / "density.csv"), 1u + 4 * 2);
  EXPECT_EQ(lines(d / "clusters.csv"), 11u);
  EXPECT_EQ(lines(d / "coclustering.csv"), 11u);
  std::ifstream in(d / "density.csv");
  dmbn::CsvReader reader(in);
  std::vector<std::string> f;
  while (reader.next(f)) {
    double est = -1.0, obs = -1.0;
    ASSERT_TRUE(dmbn::parse_real(f[3], est));
    ASSERT_TRUE(dmbn::parse_real(f[4], obs));
    EXPECT_GE(est, 0.0);
    EXPECT_LE(est, 1.0);
    EXPECT_GE(obs, 0.0);
    EXPECT_LE(obs, 1.0);
  }
}

TEST(Cli, MultipleChainsArePooled) {
  const auto d = root() / "chains";
  ASSERT_EQ(run("fit --chains 2 --data " + p(sim() / "edges.csv") + " " + kFitSet + " --out " + p(d)), 0);
  EXPECT_TRUE(fs::exists(d / "chain_0" / "manifest.json"));
  EXPECT_TRUE(fs::exists(d / "chain_1" / "manifest.json"));
  EXPECT_NE(slurp(d / "chain_0" / "mu.csv"), slurp(d / "chain_1" / "mu.csv"));
  ASSERT_EQ(run("predict --trace " + p(d) + " --horizon 1 --out " + p(d / "pred")), 0);
  EXPECT_EQ(read_json(d / "pred" / "manifest.json").at("draws"), 64);
}
