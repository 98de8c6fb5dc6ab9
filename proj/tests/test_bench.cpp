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


#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rankspace/bench.hpp"

using namespace rankspace;

namespace {

BenchSpec small_spec() {
  BenchSpec spec;
  spec.seed = 3;
  spec.warmup = 0;
  for (const auto& algo : bench_algorithms()) {
    BenchSeries s;
    s.algorithm = algo;
    s.axis = "n";
    s.values = {4, 8};
    s.base = BenchDims{4, 6, 0, 2, 5};
    spec.series.push_back(s);
  }
  return spec;
}

}  // namespace

TEST_CASE("loglog_slope recovers power laws") {
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 24, 192, 1536}) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(loglog_slope({10, 100}, {5, 5}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(loglog_slope({2, 2}, {1, 3}), std::invalid_argument);
}

TEST_CASE("report structure is deterministic") {
  const BenchSpec spec = small_spec();
  const BenchReport a = run_grid(spec), b = run_grid(spec);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].record == b.rows[i].record);
    CHECK(a.rows[i].algorithm == b.rows[i].algorithm);
    CHECK(a.rows[i].n == b.rows[i].n);
    CHECK(a.rows[i].num_nt == b.rows[i].num_nt);
    CHECK(a.rows[i].repetitions >= 5);
  }
  CHECK(a.complete);
  CHECK(a.slopes.size() == bench_algorithms().size());
  // One compile row for each rank-space cell.
  int compiles = 0;
  for (const auto& r : a.rows) compiles += r.record == "compile";
  CHECK(compiles == 4);
  CHECK(a.rows[0].median_s > 0);
  CHECK(a.to_csv().rfind("record,algorithm,axis,n,m,num_nt,num_pt,r,o,repetitions,median_s,mad_s,slope\n", 0) == 0);
  CHECK(a.to_csv().find("status,complete") != std::string::npos);
}

TEST_CASE("time budget marks the report incomplete") {
  BenchSpec spec = small_spec();
  spec.time_budget_s = 1e-9;
  const BenchReport r = run_grid(spec);
  CHECK_FALSE(r.complete);
  CHECK(r.to_csv().find("status,incomplete") != std::string::npos);
}

TEST_CASE("spec parsing and validation") {
  const BenchSpec spec = BenchSpec::from_json(
      R"({"seed": 4, "repetitions": 6, "series": [{"algorithm": "rank_inside", "axis": "r", "values": [2, 4], "n": 5}]})");
  CHECK(spec.seed == 4);
  CHECK(spec.repetitions == 6);
  REQUIRE(spec.series.size() == 1);
  CHECK(spec.series[0].base.n == 5);
  CHECK(spec.series[0].values == std::vector<int>{2, 4});

  CHECK_THROWS_AS(BenchSpec::from_json(R"({"series": [{"algorithm": "nope", "axis": "n", "values": [2]}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(BenchSpec::from_json(R"({"series": [{"algorithm": "rank_inside", "axis": "q", "values": [2]}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(BenchSpec::from_json(R"({"repetitions": 3, "series": []})"), std::invalid_argument);
  CHECK_THROWS_AS(BenchSpec::from_json(R"({"series": [{"algorithm": "td_inside", "axis": "m", "values": [1]}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(BenchSpec::from_json("not json"), std::invalid_argument);
}

TEST_CASE("hmm ordering at matched sizes") {
  BenchSpec spec;
  spec.seed = 11;
  for (const char* algo : {"rank_forward", "lowrank_forward", "dense_forward"}) {
    BenchSeries s;
    s.algorithm = algo;
    s.axis = "n";
    s.values = {128};
    s.base = BenchDims{128, 1024, 0, 64, 16};
    spec.series.push_back(s);
  }
  const BenchReport r = run_grid(spec);
  const BenchDims d{128, 1024, 0, 64, 16};
  CHECK(r.median("rank_forward", d) < r.median("lowrank_forward", d));
  CHECK(r.median("lowrank_forward", d) < r.median("dense_forward", d));
}
