// Copyright 2026 The rankspace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "grad_check.hpp"
#include "rankspace/bench.hpp"
#include "rankspace/hmm_infer.hpp"
#include "rankspace/oracle.hpp"
#include "rankspace/pcfg_infer.hpp"
#include "rankspace/trainer.hpp"

using namespace rankspace;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kLogZTol = 1e-9;
constexpr double kMarginalTol = 1e-9;
constexpr double kSpanSumTol = 1e-6;
constexpr double kRootTol = 1e-8;
constexpr double kMbrTol = 1e-12;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-4;
constexpr double kRecoveryRatio = 1.10;
constexpr int kRecoveryEpochs = 30;
constexpr double kHmmSuiteSeconds = 30;
constexpr double kPcfgSuiteSeconds = 60;
constexpr double kRecoverySeconds = 600;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += !o.pass;
  std::printf("criterion %d %s: %s (%s)\n", id, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

std::vector<int> draw_seq(std::mt19937_64& rng, int n, int o) {
  std::uniform_int_distribution<int> pick(0, o - 1);
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int& t : s) t = pick(rng);
  return s;
}

int draw(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double spread(std::initializer_list<double> xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return *hi - *lo;
}

// Criterion 2 and 3 share one suite of PCFG instances.
struct PcfgInstance {
  CpdPCFG model;
  std::vector<int> seq;
};

std::vector<PcfgInstance> pcfg_suite() {
  std::mt19937_64 rng(2024);
  std::vector<PcfgInstance> out;
  for (int c = 0; c < 25; ++c) {
    const int nt = draw(rng, 1, 2), pt = draw(rng, 1, 2), r = draw(rng, 1, 3), o = draw(rng, 1, 3), n = draw(rng, 2, 5);
    PcfgInstance inst{random_cpd_pcfg(nt, pt, r, o, rng()), {}};
    inst.seq = draw_seq(rng, n, o);
    out.push_back(std::move(inst));
  }
  return out;
}

Outcome hmm_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  double worst = 0;
  for (int c = 0; c < 50; ++c) {
    const int m = draw(rng, 1, 4), r = draw(rng, 1, 3), o = draw(rng, 1, 4), n = draw(rng, 1, 6);
    const CpdHMM model = random_cpd_hmm(m, r, o, rng());
    const auto seq = draw_seq(rng, n, o);
    const DenseJointHMM dense = reconstruct_hmm(model);
    worst = std::max(worst, spread({dense_forward(dense, seq).logZ, lowrank_forward(model, seq).logZ,
                                    rank_forward(compile_rank_hmm(model), seq).logZ, hmm_bruteforce_logZ(dense, seq)}));
  }
  const double secs = seconds_since(t0);
  return {worst <= kLogZTol && secs < kHmmSuiteSeconds,
          fmt::format("50 models, max |dlogZ| {:.2e} <= {:.0e}, {:.2f}s < {}s", worst, kLogZTol, secs, kHmmSuiteSeconds)};
}

Outcome pcfg_equivalence(const std::vector<PcfgInstance>& suite) {
  const auto t0 = Clock::now();
  double worst = 0;
  for (const auto& [model, seq] : suite) {
    const DensePCFG dense = reconstruct_pcfg(model);
    worst = std::max(worst, spread({dense_inside(dense, seq).logZ, td_inside(model, seq).logZ,
                                    lpcfg_inside(cpd_to_lpcfg(model), model.E, model.start, seq).logZ,
                                    rank_inside(compile_rank_pcfg(model), seq).logZ, pcfg_bruteforce(dense, seq).logZ}));
  }
  const double secs = seconds_since(t0);
  return {worst <= kLogZTol && secs < kPcfgSuiteSeconds,
          fmt::format("{} models, max |dlogZ| {:.2e} <= {:.0e}, {:.2f}s < {}s", suite.size(), worst, kLogZTol, secs,
                      kPcfgSuiteSeconds)};
}

// Returns (|sum of width>=2 marginals - (n-1)|, |mu(0,n) - 1|).
std::pair<double, double> marginal_identities(const SpanMarginals& mu) {
  double total = 0;
  for (int w = 2; w <= mu.n; ++w)
    for (int i = 0; i + w <= mu.n; ++i) total += mu(i, i + w);
  return {std::abs(total - (mu.n - 1)), std::abs(mu(0, mu.n) - 1)};
}

Outcome marginals(const std::vector<PcfgInstance>& suite) {
  double worst = 0, worst_sum = 0, worst_root = 0;
  for (const auto& [model, seq] : suite) {
    const SpanMarginals mu = span_marginals(compile_rank_pcfg(model), seq);
    const PcfgOracleResult oracle = pcfg_bruteforce(reconstruct_pcfg(model), seq);
    for (int w = 2; w <= mu.n; ++w)
      for (int i = 0; i + w <= mu.n; ++i) worst = std::max(worst, std::abs(mu(i, i + w) - oracle.marginals(i, i + w)));
    const auto [s, root] = marginal_identities(mu);
    worst_sum = std::max(worst_sum, s);
    worst_root = std::max(worst_root, root);
  }
  // DP-only instances.
  std::mt19937_64 rng(33);
  for (int c = 0; c < 4; ++c) {
    const CpdPCFG model = random_cpd_pcfg(4 + c, 6, 16, 12, rng());
    const SpanMarginals mu = span_marginals(compile_rank_pcfg(model), draw_seq(rng, 20, 12));
    const auto [s, root] = marginal_identities(mu);
    worst_sum = std::max(worst_sum, s);
    worst_root = std::max(worst_root, root);
  }
  const bool ok = worst <= kMarginalTol && worst_sum <= kSpanSumTol && worst_root <= kRootTol;
  return {ok, fmt::format("oracle diff {:.2e}, span-sum err {:.2e}, root err {:.2e} (incl. 4 n=20 r=16)", worst,
                          worst_sum, worst_root)};
}

Outcome mbr() {
  std::mt19937_64 rng(44);
  double worst = 0;
  int count = 0;
  for (int n = 2; n <= 6; ++n)
    for (int c = 0; c < 6; ++c, ++count) {
      const int o = draw(rng, 2, 5);
      const CpdPCFG model = random_cpd_pcfg(draw(rng, 1, 3), draw(rng, 1, 3), draw(rng, 1, 4), o, rng());
      const SpanMarginals mu = span_marginals(compile_rank_pcfg(model), draw_seq(rng, n, o));
      const double gap = mbr_bruteforce(mu).objective - expected_spans(mu, mbr_decode(mu));
      worst = std::max(worst, std::abs(gap));
    }
  return {worst <= kMbrTol, fmt::format("{} instances n=2..6, max objective gap {:.2e} <= {:.0e}", count, worst, kMbrTol)};
}

Outcome gradients() {
  std::mt19937_64 rng(55);
  double worst_hmm = 0, worst_pcfg = 0;
  for (int c = 0; c < 20; ++c) {
    const int o = draw(rng, 3, 6), r = draw(rng, 1, 4);
    Corpus batch;
    for (int b = 0; b < 3; ++b) batch.push_back(draw_seq(rng, draw(rng, 1, 6), o));
    const ScoreParams p = init_hmm_scores(draw(rng, 1, 5), r, o, rng());
    const std::vector<TokenSeq> views(batch.begin(), batch.end());
    worst_hmm = std::max(worst_hmm, testing::directional_check(p, views, rng(), kGradStep).rel_error);
  }
  for (int c = 0; c < 20; ++c) {
    const int o = draw(rng, 3, 6), r = draw(rng, 1, 4);
    Corpus batch;
    for (int b = 0; b < 3; ++b) batch.push_back(draw_seq(rng, draw(rng, 2, 6), o));
    const ScoreParams p = init_pcfg_scores(draw(rng, 1, 4), draw(rng, 1, 4), r, o, rng());
    const std::vector<TokenSeq> views(batch.begin(), batch.end());
    worst_pcfg = std::max(worst_pcfg, testing::directional_check(p, views, rng(), kGradStep).rel_error);
  }
  return {worst_hmm <= kGradRelTol && worst_pcfg <= kGradRelTol,
          fmt::format("20+20 checks, max rel err hmm {:.2e} pcfg {:.2e} <= {:.0e}", worst_hmm, worst_pcfg, kGradRelTol)};
}

Outcome recovery() {
  const std::uint64_t seed = 1;
  const CpdHMM gen = random_cpd_hmm(8, 4, 32, seed);
  const Corpus train = sample_corpus(gen, 1, 2000, 200, seed + 1);
  const Corpus val = sample_corpus(gen, 1, 200, 200, seed + 2);
  const Corpus test = sample_corpus(gen, 1, 500, 200, seed + 3);
  const double gen_ppl = perplexity(compile_rank_hmm(gen), test);

  TrainConfig cfg = TrainConfig::defaults(ModelKind::hmm);
  cfg.seed = seed;
  cfg.epochs = kRecoveryEpochs;
  cfg.workers = 1;
  const auto t0 = Clock::now();
  const FitResult fr = fit(init_hmm_scores(8, 4, 32, seed + 4), train, val, cfg);
  const double secs = seconds_since(t0);
  const double fit_ppl = perplexity(compile_rank_hmm(to_cpd_hmm(fr.params)), test);
  const double ratio = fit_ppl / gen_ppl;
  const bool ok = ratio <= kRecoveryRatio && static_cast<int>(fr.trace.size()) <= kRecoveryEpochs && secs < kRecoverySeconds;
  return {ok, fmt::format("held-out ppl fit {:.3f} vs generator {:.3f}, ratio {:.4f} <= {:.2f}, {} epochs, {:.1f}s",
                          fit_ppl, gen_ppl, ratio, kRecoveryRatio, fr.trace.size(), secs)};
}

BenchSeries series(const char* algo, const char* axis, std::vector<int> values, BenchDims base) {
  return BenchSeries{algo, axis, std::move(values), base};
}

Outcome scaling() {
  BenchSpec spec;
  spec.seed = 7;
  spec.repetitions = 7;
  spec.warmup = 2;
  spec.compile_rows = false;
  spec.series = {
      series("rank_forward", "r", {64, 128, 256, 512}, BenchDims{64, 64, 0, 64, 1024}),
      series("lowrank_forward", "m", {512, 1024, 2048, 4096}, BenchDims{64, 512, 0, 32, 1024}),
      series("dense_inside", "m", {48, 96, 192}, BenchDims{16, 48, 0, 16, 64}),
      series("rank_inside", "n", {64, 128, 256}, BenchDims{64, 24, 0, 8, 64}),
  };
  const BenchReport grid = run_grid(spec);

  struct Band {
    const char* algo;
    const char* axis;
    double lo, hi;
  };
  const Band bands[] = {{"rank_forward", "r", 1.6, 2.4},
                        {"lowrank_forward", "m", 0.8, 1.4},
                        {"dense_inside", "m", 2.5, 3.5},
                        {"rank_inside", "n", 2.5, 3.5}};
  bool ok = grid.complete;
  std::string detail;
  for (const Band& b : bands) {
    const BenchSlope& s = grid.slope(b.algo, b.axis);
    const bool in = s.reported && s.slope >= b.lo && s.slope <= b.hi;
    ok = ok && in;
    detail += fmt::format("{}/{} {} in [{}, {}]; ", b.algo, b.axis, s.reported ? fmt::format("{:.2f}", s.slope) : "n/a",
                          b.lo, b.hi);
  }

  BenchSpec order;
  order.seed = 8;
  order.warmup = 1;
  order.compile_rows = false;
  const BenchDims at{32, 512, 0, 32, 64};
  for (const char* algo : {"rank_inside", "td_inside", "dense_inside"})
    order.series.push_back(series(algo, "n", {at.n}, at));
  const BenchReport cells = run_grid(order);
  const double rank = cells.median("rank_inside", at), td = cells.median("td_inside", at),
               dense = cells.median("dense_inside", at);
  const bool ordered = cells.complete && rank < td && td < dense;
  detail += fmt::format("at n=32 m=512 r=32: rank {:.3g}s < td {:.3g}s < dense {:.3g}s", rank, td, dense);
  return {ok && ordered, detail};
}

class Workdir {
 public:
  Workdir() : dir_(fs::temp_directory_path() / fmt::format("rankspace_accept_{}", ::getpid())) {
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::string& out_path) {
  const std::string cmd = std::string(RANKSPACE_CLI) + " " + args + " > " + out_path + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  Workdir wd;
  {
    std::ofstream c(wd.path("corpus.txt"));
    std::mt19937_64 rng(88);
    for (int s = 0; s < 30; ++s) {
      const auto seq = draw_seq(rng, draw(rng, 2, 12), 20);
      for (std::size_t i = 0; i < seq.size(); ++i) c << (i ? " " : "") << "w" << seq[i] + 2;
      c << "\n";
    }
  }
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen_hmm", "gen --kind cpd_hmm --m 16 --r 8 --o 22 --seed 5"},
      {"gen_pcfg", "gen --kind cpd_pcfg --num-nt 6 --num-pt 10 --r 8 --o 22 --seed 5"},
      {"score_hmm", "score --model " + wd.path("hmm.json") + " --corpus " + wd.path("corpus.txt")},
      {"score_pcfg", "score --model " + wd.path("pcfg.json") + " --corpus " + wd.path("corpus.txt")},
      {"parse", "parse --model " + wd.path("pcfg.json") + " --corpus " + wd.path("corpus.txt")},
  };
  std::vector<std::string> mismatched, broken;
  for (const auto& [name, args] : commands) {
    const std::string a = wd.path(name + ".a"), b = wd.path(name + ".b");
    if (run_cli(args, a) != 0 || run_cli(args, b) != 0) broken.push_back(name);
    else if (slurp(a) != slurp(b) || slurp(a).empty()) mismatched.push_back(name);
    // Later commands read the generated models.
    if (name == "gen_hmm") fs::copy_file(a, wd.path("hmm.json"));
    if (name == "gen_pcfg") fs::copy_file(a, wd.path("pcfg.json"));
  }
  auto names = [](const std::vector<std::string>& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  if (!broken.empty()) return {false, "command failed: " + names(broken)};
  if (!mismatched.empty()) return {false, "outputs differ: " + names(mismatched)};
  return {true, fmt::format("{} commands byte-identical across two runs", commands.size())};
}

}  // namespace

int main() {
  const auto suite = pcfg_suite();
  report(1, "hmm oracle equivalence", hmm_equivalence);
  report(2, "pcfg four-way equivalence", [&] { return pcfg_equivalence(suite); });
  report(3, "span marginals", [&] { return marginals(suite); });
  report(4, "mbr decoding", mbr);
  report(5, "gradient checks", gradients);
  report(6, "training recovery", recovery);
  report(7, "complexity scaling", scaling);
  report(8, "cli determinism", determinism);
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures ? 1 : 0;
}
