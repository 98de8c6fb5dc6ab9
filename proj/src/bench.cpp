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


#include "rankspace/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rankspace/grammar.hpp"
#include "rankspace/hmm_infer.hpp"
#include "rankspace/pcfg_infer.hpp"

namespace rankspace {

namespace {

using Clock = std::chrono::steady_clock;

bool is_pcfg(const std::string& algorithm) { return algorithm.find("inside") != std::string::npos; }

int& axis_ref(BenchDims& d, const std::string& axis) {
  if (axis == "n") return d.n;
  if (axis == "m") return d.m;
  if (axis == "r") return d.r;
  if (axis == "o") return d.o;
  throw std::invalid_argument("bench: unknown axis '" + axis + "' (expected n, m, r or o)");
}

std::pair<int, int> split_symbols(const BenchDims& d) {
  const int nt = d.num_nt > 0 ? d.num_nt : std::max(1, d.m / 3);
  return {nt, d.m - nt};
}

LogMat log_of(const Matrix& x) {
  return x.unaryExpr([](Real v) { return v > 0 ? std::log(v) : kNegInf; });
}

Matrix exp_of(const LogMat& x) {
  return x.unaryExpr([](Real v) { return std::exp(v); });
}

// Rule tensor via real-domain products; used only to set up timing inputs.
DensePCFG dense_pcfg_fast(const CpdPCFG& model) {
  const int m = model.num_symbols();
  const Matrix u = exp_of(model.U), v = exp_of(model.V), w = exp_of(model.W);
  DensePCFG out;
  out.num_nt = model.num_nt;
  out.num_pt = model.num_pt;
  out.start = model.start;
  out.emission = model.E;
  out.binary.resize(model.num_nt, static_cast<Eigen::Index>(m) * m);
  for (int a = 0; a < model.num_nt; ++a) {
    const Matrix slice = v.transpose() * u.row(a).transpose().asDiagonal() * w;  // m x m, row-major = b*m + c
    out.binary.row(a) = log_of(Eigen::Map<const Matrix>(slice.data(), 1, slice.size())).row(0);
  }
  return out;
}

// Joint HMM holding only the slices of words that occur in `seq`; the
// sentence is remapped onto that reduced vocabulary.
DenseJointHMM dense_hmm_for(const CpdHMM& model, std::vector<int>& seq) {
  const Matrix u = exp_of(model.U), v = exp_of(model.V), w = exp_of(model.W);
  std::map<int, int> remap;
  for (int& t : seq) t = remap.emplace(t, static_cast<int>(remap.size())).first->second;
  DenseJointHMM out;
  out.start = model.start;
  out.by_word.resize(remap.size());
  for (const auto& [word, id] : remap)
    out.by_word[static_cast<std::size_t>(id)] = log_of(u * w.col(word).asDiagonal() * v);
  return out;
}

// Prepares one cell and returns the closure to time plus an optional
// one-time compile closure.
struct Cell {
  std::function<void()> run;
  std::function<void()> compile;
  BenchRow dims;
};

// Keeps results observable so the calls are not optimized away.
volatile Real g_sink = 0;

Cell make_cell(const std::string& algorithm, const BenchDims& d, std::uint64_t seed) {
  Cell cell;
  cell.dims.algorithm = algorithm;
  cell.dims.n = d.n;
  cell.dims.m = d.m;
  cell.dims.r = d.r;
  cell.dims.o = d.o;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> pick(0, d.o - 1);
  auto seq = std::make_shared<std::vector<int>>(static_cast<std::size_t>(d.n));
  for (int& t : *seq) t = pick(rng);

  if (!is_pcfg(algorithm)) {
    auto model = std::make_shared<CpdHMM>(random_cpd_hmm(d.m, d.r, d.o, seed));
    if (algorithm == "dense_forward") {
      auto dense = std::make_shared<DenseJointHMM>(dense_hmm_for(*model, *seq));
      cell.run = [dense, seq] { g_sink = dense_forward(*dense, *seq, false).logZ; };
    } else if (algorithm == "lowrank_forward") {
      cell.run = [model, seq] { g_sink = lowrank_forward(*model, *seq, false).logZ; };
    } else {
      auto rank = std::make_shared<RankHMM>(compile_rank_hmm(*model));
      cell.run = [rank, seq] { g_sink = rank_forward(*rank, *seq, false).logZ; };
      cell.compile = [model] { g_sink = compile_rank_hmm(*model).pi()[0]; };
    }
    return cell;
  }

  const auto [nt, pt] = split_symbols(d);
  if (pt < 1) throw std::invalid_argument(fmt::format("bench: m={} leaves no preterminals", d.m));
  cell.dims.num_nt = nt;
  cell.dims.num_pt = pt;
  auto model = std::make_shared<CpdPCFG>(random_cpd_pcfg(nt, pt, d.r, d.o, seed));
  if (algorithm == "dense_inside") {
    auto dense = std::make_shared<DensePCFG>(dense_pcfg_fast(*model));
    cell.run = [dense, seq] { g_sink = dense_inside(*dense, *seq).logZ; };
  } else if (algorithm == "td_inside") {
    cell.run = [model, seq] { g_sink = td_inside(*model, *seq).logZ; };
  } else if (algorithm == "lpcfg_inside") {
    auto view = std::make_shared<LpcfgView>(cpd_to_lpcfg(*model));
    cell.run = [view, model, seq] { g_sink = lpcfg_inside(*view, model->E, model->start, *seq).logZ; };
  } else {
    auto rank = std::make_shared<RankPCFG>(compile_rank_pcfg(*model));
    cell.run = [rank, seq] { g_sink = detail::rank_inside_scaled(*rank, *seq).logZ; };
    cell.compile = [model] { g_sink = compile_rank_pcfg(*model).L()[0]; };
  }
  return cell;
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t k = xs.size();
  return k % 2 ? xs[k / 2] : 0.5 * (xs[k / 2 - 1] + xs[k / 2]);
}

std::pair<double, double> time_it(const std::function<void()>& fn, int reps, int warmup) {
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> ts;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    fn();
    ts.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  }
  const double med = median_of(ts);
  for (double& t : ts) t = std::abs(t - med);
  return {med, median_of(ts)};
}

double measure_resolution() {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 64; ++i) {
    const auto t0 = Clock::now();
    auto t1 = Clock::now();
    while (t1 == t0) t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

std::string csv_row(const std::string& record, const std::string& algorithm, const std::string& axis,
                    const BenchRow* r, const std::string& slope) {
  if (!r) return fmt::format("{},{},{},,,,,,,,,,{}\n", record, algorithm, axis, slope);
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{:.9g},{:.9g},{}\n", record, algorithm, axis, r->n, r->m, r->num_nt,
                     r->num_pt, r->r, r->o, r->repetitions, r->median_s, r->mad_s, slope);
}

}  // namespace

const std::vector<std::string>& bench_algorithms() {
  static const std::vector<std::string> names{"dense_forward", "lowrank_forward", "rank_forward", "dense_inside",
                                              "td_inside",     "lpcfg_inside",    "rank_inside"};
  return names;
}

void BenchSpec::check() const {
  if (repetitions < 5) throw std::invalid_argument("bench: repetitions must be >= 5");
  if (warmup < 0) throw std::invalid_argument("bench: warmup must be >= 0");
  if (!(time_budget_s > 0)) throw std::invalid_argument("bench: time_budget_s must be positive");
  if (workers < 1) throw std::invalid_argument("bench: workers must be >= 1");
  const auto& algos = bench_algorithms();
  for (const auto& s : series) {
    if (std::find(algos.begin(), algos.end(), s.algorithm) == algos.end())
      throw std::invalid_argument("bench: unknown algorithm '" + s.algorithm + "'");
    BenchDims d = s.base;
    axis_ref(d, s.axis);
    if (s.values.empty()) throw std::invalid_argument("bench: series '" + s.algorithm + "' has no values");
    for (int v : s.values) {
      axis_ref(d, s.axis) = v;
      if (d.n < 1 || d.m < 1 || d.r < 1 || d.o < 1)
        throw std::invalid_argument(fmt::format("bench: non-positive dimension in series '{}'", s.algorithm));
      if (is_pcfg(s.algorithm) && d.n < 2) throw std::invalid_argument("bench: PCFG cells need n >= 2");
      if (is_pcfg(s.algorithm) && split_symbols(d).second < 1)
        throw std::invalid_argument(fmt::format("bench: m={} leaves no preterminals", d.m));
    }
  }
}

BenchSpec BenchSpec::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BenchSpec spec;
    spec.seed = j.value("seed", spec.seed);
    spec.repetitions = j.value("repetitions", spec.repetitions);
    spec.warmup = j.value("warmup", spec.warmup);
    spec.time_budget_s = j.value("time_budget_s", spec.time_budget_s);
    spec.compile_rows = j.value("compile_rows", spec.compile_rows);
    spec.workers = j.value("workers", spec.workers);
    for (const auto& s : j.at("series")) {
      BenchSeries series;
      series.algorithm = s.at("algorithm").get<std::string>();
      series.axis = s.at("axis").get<std::string>();
      series.values = s.at("values").get<std::vector<int>>();
      series.base.n = s.value("n", series.base.n);
      series.base.m = s.value("m", series.base.m);
      series.base.num_nt = s.value("num_nt", series.base.num_nt);
      series.base.r = s.value("r", series.base.r);
      series.base.o = s.value("o", series.base.o);
      spec.series.push_back(std::move(series));
    }
    spec.check();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bench spec: ") + e.what());
  }
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw std::invalid_argument("loglog_slope: all x values equal");
  return sxy / sxx;
}

BenchReport run_grid(const BenchSpec& spec) {
  spec.check();
  BenchReport report;
  report.timer_resolution_s = measure_resolution();
  const auto start = Clock::now();
  auto over_budget = [&] { return std::chrono::duration<double>(Clock::now() - start).count() > spec.time_budget_s; };

  std::uint64_t cell_index = 0;
  for (const auto& series : spec.series) {
    std::vector<double> xs, ys;
    for (int value : series.values) {
      if (over_budget()) {
        report.complete = false;
        break;
      }
      BenchDims d = series.base;
      axis_ref(d, series.axis) = value;
      Cell cell = make_cell(series.algorithm, d, spec.seed + 1000003ULL * ++cell_index);
      BenchRow row = cell.dims;
      row.record = "cell";
      row.axis = series.axis;
      row.repetitions = spec.repetitions;
      std::tie(row.median_s, row.mad_s) = time_it(cell.run, spec.repetitions, spec.warmup);
      report.rows.push_back(row);
      xs.push_back(value);
      ys.push_back(row.median_s);

      if (spec.compile_rows && cell.compile) {
        BenchRow c = row;
        c.record = "compile";
        c.algorithm = series.algorithm == "rank_forward" ? "compile_rank_hmm" : "compile_rank_pcfg";
        std::tie(c.median_s, c.mad_s) = time_it(cell.compile, spec.repetitions, 0);
        report.rows.push_back(c);
      }
      if (spec.workers > 1) {
        BenchRow t = row;
        t.record = "throughput";
        const int workers = spec.workers;
        // Seconds per sentence with `workers` threads sharing the model.
        auto batch = [&] {
          std::vector<std::thread> threads;
          for (int k = 0; k < workers; ++k) threads.emplace_back(cell.run);
          for (auto& th : threads) th.join();
        };
        std::tie(t.median_s, t.mad_s) = time_it(batch, spec.repetitions, spec.warmup);
        t.median_s /= workers;
        t.mad_s /= workers;
        report.rows.push_back(t);
      }
    }
    if (xs.size() >= 2) {
      BenchSlope s;
      s.algorithm = series.algorithm;
      s.axis = series.axis;
      s.points = static_cast<int>(xs.size());
      s.reported = *std::min_element(ys.begin(), ys.end()) > 4 * report.timer_resolution_s;
      s.slope = loglog_slope(xs, ys);
      report.slopes.push_back(s);
    }
  }
  return report;
}

std::string BenchReport::to_csv() const {
  std::string out = "record,algorithm,axis,n,m,num_nt,num_pt,r,o,repetitions,median_s,mad_s,slope\n";
  for (const auto& r : rows) out += csv_row(r.record, r.algorithm, r.axis, &r, "");
  for (const auto& s : slopes)
    out += csv_row("slope", s.algorithm, s.axis, nullptr, s.reported ? fmt::format("{:.6f}", s.slope) : "");
  out += csv_row("status", complete ? "complete" : "incomplete", "", nullptr, "");
  return out;
}

std::string BenchReport::to_table() const {
  std::string out = fmt::format("{:<18} {:>5} {:>6} {:>6} {:>6} {:>6} {:>7} {:>12} {:>12}\n", "algorithm", "n", "m", "nt",
                                "r", "o", "record", "median_s", "mad_s");
  for (const auto& r : rows)
    out += fmt::format("{:<18} {:>5} {:>6} {:>6} {:>6} {:>6} {:>7} {:>12.6g} {:>12.3g}\n", r.algorithm, r.n, r.m,
                       r.num_nt, r.r, r.o, r.record == "cell" ? "" : r.record, r.median_s, r.mad_s);
  for (const auto& s : slopes)
    out += s.reported ? fmt::format("slope {:<16} vs {}: {:.3f}\n", s.algorithm, s.axis, s.slope)
                      : fmt::format("slope {:<16} vs {}: not reported (below timer resolution)\n", s.algorithm, s.axis);
  if (!complete) out += "report incomplete: time budget exceeded\n";
  return out;
}

double BenchReport::median(const std::string& algorithm, const BenchDims& dims) const {
  for (const auto& r : rows)
    if (r.record == "cell" && r.algorithm == algorithm && r.n == dims.n && r.m == dims.m && r.r == dims.r &&
        r.o == dims.o)
      return r.median_s;
  throw std::out_of_range("bench: no cell for " + algorithm);
}

const BenchSlope& BenchReport::slope(const std::string& algorithm, const std::string& axis) const {
  for (const auto& s : slopes)
    if (s.algorithm == algorithm && s.axis == axis) return s;
  throw std::out_of_range("bench: no slope for " + algorithm + " vs " + axis);
}

}  // namespace rankspace
