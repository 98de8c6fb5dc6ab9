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


#ifndef RANKSPACE_BENCH_HPP
#define RANKSPACE_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace rankspace {

// One benchmark cell. For PCFG algorithms m counts all symbols; num_nt == 0
// means num_nt = max(1, m / 3) and num_pt = m - num_nt.
struct BenchDims {
  int n = 32;
  int m = 64;
  int num_nt = 0;
  int r = 16;
  int o = 64;
};

// Times `algorithm` at every value of `axis` (one of n, m, r, o), other dims
// taken from `base`.
struct BenchSeries {
  std::string algorithm;
  std::string axis;
  std::vector<int> values;
  BenchDims base;
};

struct BenchSpec {
  std::vector<BenchSeries> series;
  std::uint64_t seed = 0;
  int repetitions = 5;
  int warmup = 1;
  double time_budget_s = 600;
  bool compile_rows = true;
  int workers = 1;  // > 1 adds throughput rows

  // Throws std::invalid_argument on unknown algorithms/axes or bad values.
  static BenchSpec from_json(const std::string& text);
  void check() const;
};

struct BenchRow {
  std::string record;  // "cell", "compile" or "throughput"
  std::string algorithm;
  std::string axis;
  int n = 0, m = 0, num_nt = 0, num_pt = 0, r = 0, o = 0;
  int repetitions = 0;
  double median_s = 0;
  double mad_s = 0;
};

struct BenchSlope {
  std::string algorithm;
  std::string axis;
  int points = 0;
  bool reported = false;  // false when timings are too close to the timer resolution
  double slope = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSlope> slopes;
  bool complete = true;
  double timer_resolution_s = 0;

  std::string to_csv() const;
  std::string to_table() const;
  // Median of the first "cell" row matching algorithm and dims; throws if absent.
  double median(const std::string& algorithm, const BenchDims& dims) const;
  const BenchSlope& slope(const std::string& algorithm, const std::string& axis) const;
};

const std::vector<std::string>& bench_algorithms();

// Least-squares slope of log(ys) against log(xs).
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

BenchReport run_grid(const BenchSpec& spec);

}  // namespace rankspace

#endif  // RANKSPACE_BENCH_HPP
