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


#include "rankspace/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "rankspace/hmm_infer.hpp"
#include "rankspace/oracle.hpp"
#include "rankspace/pcfg_infer.hpp"

namespace rankspace {

namespace {

double max_pairwise(const std::vector<double>& xs) {
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return *hi - *lo;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : "; ") + x;
  return out;
}

OracleCaseResult hmm_case(int index, std::mt19937_64& rng, bool corrupt) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int m = pick(1, 4), r = pick(1, 3), o = pick(1, 4), n = pick(1, 6);
  CpdHMM model = random_cpd_hmm(m, r, o, rng());
  std::vector<int> seq(static_cast<std::size_t>(n));
  for (int& t : seq) t = pick(0, o - 1);
  OracleCaseResult res;
  res.index = index;
  res.dims = fmt::format("m={} r={} o={} n={}", m, r, o, n);
  if (corrupt) model.U(0, 0) += std::log(1.5);
  if (auto errs = validate(model); !errs.empty()) {
    res.passed = false;
    res.message = "invalid model: " + join(errs);
    return res;
  }
  const DenseJointHMM dense = reconstruct_hmm(model);
  const std::vector<double> z{dense_forward(dense, seq).logZ, lowrank_forward(model, seq).logZ,
                              rank_forward(compile_rank_hmm(model), seq).logZ, hmm_bruteforce_logZ(dense, seq)};
  res.max_logz_diff = max_pairwise(z);
  if (!(res.max_logz_diff <= kOracleLogZTol)) {
    res.passed = false;
    res.message = fmt::format("logZ disagreement {:.3g} (dense {}, lowrank {}, rank {}, oracle {})", res.max_logz_diff,
                              z[0], z[1], z[2], z[3]);
  }
  return res;
}

OracleCaseResult pcfg_case(int index, std::mt19937_64& rng, bool corrupt) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int nt = pick(1, 2), pt = pick(1, 2), r = pick(1, 3), o = pick(1, 3), n = pick(2, 5);
  CpdPCFG model = random_cpd_pcfg(nt, pt, r, o, rng());
  std::vector<int> seq(static_cast<std::size_t>(n));
  for (int& t : seq) t = pick(0, o - 1);
  OracleCaseResult res;
  res.index = index;
  res.dims = fmt::format("nt={} pt={} r={} o={} n={}", nt, pt, r, o, n);
  if (corrupt) model.U(0, 0) += std::log(1.5);
  if (auto errs = validate(model); !errs.empty()) {
    res.passed = false;
    res.message = "invalid model: " + join(errs);
    return res;
  }
  const DensePCFG dense = reconstruct_pcfg(model);
  const RankPCFG rank = compile_rank_pcfg(model);
  const PcfgOracleResult oracle = pcfg_bruteforce(dense, seq);
  const std::vector<double> z{dense_inside(dense, seq).logZ, td_inside(model, seq).logZ,
                              lpcfg_inside(cpd_to_lpcfg(model), model.E, model.start, seq).logZ,
                              rank_inside(rank, seq).logZ, oracle.logZ};
  res.max_logz_diff = max_pairwise(z);
  std::vector<std::string> problems;
  if (!(res.max_logz_diff <= kOracleLogZTol))
    problems.push_back(fmt::format("logZ disagreement {:.3g} (dense {}, td {}, lpcfg {}, rank {}, oracle {})",
                                   res.max_logz_diff, z[0], z[1], z[2], z[3], z[4]));
  const SpanMarginals mu = span_marginals(rank, seq);
  for (int w = 2; w <= n; ++w)
    for (int i = 0; i + w <= n; ++i)
      res.max_marginal_diff = std::max(res.max_marginal_diff, std::abs(mu(i, i + w) - oracle.marginals(i, i + w)));
  if (!(res.max_marginal_diff <= kOracleMarginalTol))
    problems.push_back(fmt::format("span marginal disagreement {:.3g}", res.max_marginal_diff));
  res.mbr_gap = oracle.mbr_objective - expected_spans(mu, mbr_decode(mu));
  if (!(res.mbr_gap <= kOracleMbrTol)) problems.push_back(fmt::format("MBR objective short by {:.3g}", res.mbr_gap));
  res.passed = problems.empty();
  res.message = join(problems);
  return res;
}

}  // namespace

bool OracleCheckReport::passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const OracleCaseResult& c) { return c.passed; });
}

std::string OracleCheckReport::to_text() const {
  std::string out;
  int failed = 0;
  for (const auto& c : cases) {
    failed += !c.passed;
    out += fmt::format("case {:>3} {:<5} {:<28} logZ diff {:.2e}", c.index, c.passed ? "ok" : "FAIL", c.dims,
                       c.max_logz_diff);
    if (kind == "pcfg") out += fmt::format("  marginal diff {:.2e}  mbr gap {:.2e}", c.max_marginal_diff, c.mbr_gap);
    if (!c.message.empty()) out += "  " + c.message;
    out += "\n";
  }
  out += fmt::format("{}: {} cases, {} mismatches: {}\n", kind, cases.size(), failed, failed ? "FAIL" : "PASS");
  return out;
}

OracleCheckReport oracle_check(ModelKind kind, int cases, std::uint64_t seed, bool corrupt) {
  if (cases < 0) throw std::invalid_argument("oracle_check: cases must be >= 0");
  OracleCheckReport report;
  report.kind = kind == ModelKind::hmm ? "hmm" : "pcfg";
  std::mt19937_64 rng(seed);
  for (int i = 0; i < cases; ++i)
    report.cases.push_back(kind == ModelKind::hmm ? hmm_case(i, rng, corrupt) : pcfg_case(i, rng, corrupt));
  return report;
}

}  // namespace rankspace
