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

#include "doctest.h"
#include "rankspace/oracle.hpp"
#include "rankspace/pcfg_infer.hpp"
#include "test_util.hpp"

using namespace rankspace;

namespace {

// One nonterminal, one preterminal, every binary rule equally likely.
DensePCFG symmetric_grammar(int o) {
  DensePCFG g;
  g.num_nt = 1;
  g.num_pt = 1;
  g.start = LogVec::Zero(1);
  g.binary = LogMat::Constant(1, 4, std::log(0.25));
  g.emission = testing::log_uniform(1, o);
  return g;
}

double total_mu(const SpanMarginals& mu) {
  double s = 0;
  for (int i = 0; i < mu.n; ++i)
    for (int j = i + 2; j <= mu.n; ++j) s += mu(i, j);
  return s;
}

}  // namespace

TEST_CASE("dense_inside closed forms") {
  SUBCASE("n = 2 single derivation") {
    const DensePCFG g = reconstruct_pcfg(random_cpd_pcfg(1, 1, 2, 3, 5));
    const std::vector<int> seq{2, 0};
    const double expect = g.start[0] + g.rule(0, 1, 1) + g.emission(0, 2) + g.emission(0, 0);
    CHECK(dense_inside(g, seq).logZ == doctest::Approx(expect).epsilon(1e-13));
  }
  SUBCASE("n = 3 two bracketings") {
    const DensePCFG g = symmetric_grammar(3);
    const std::vector<int> seq{0, 1, 2};
    const double expect = std::log(2.0) + 2 * std::log(0.25) + 3 * std::log(1.0 / 3);
    CHECK(dense_inside(g, seq).logZ == doctest::Approx(expect).epsilon(1e-13));
  }
  SUBCASE("length one is rejected") {
    CHECK_THROWS_AS(dense_inside(symmetric_grammar(2), std::vector<int>{0}), std::invalid_argument);
  }
  SUBCASE("out-of-vocabulary") {
    CHECK_THROWS_AS(dense_inside(symmetric_grammar(2), std::vector<int>{0, 2}), std::out_of_range);
  }
}

TEST_CASE("dense_inside matches enumeration") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DensePCFG g = reconstruct_pcfg(random_cpd_pcfg(2, 2, 3, 3, seed));
    const auto seq = testing::random_sequence(5, 3, seed);
    CHECK(std::abs(dense_inside(g, seq).logZ - pcfg_bruteforce(g, seq).logZ) < 1e-9);
  }
}

TEST_CASE("four-way inside equivalence") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const int nt = 1 + seed % 3, pt = 1 + seed % 4, r = 1 + seed % 5, o = 4;
    const int n = 2 + seed % 7;
    const CpdPCFG g = random_cpd_pcfg(nt, pt, r, o, seed * 13 + 1);
    const auto seq = testing::random_sequence(n, o, seed);
    const double td = td_inside(g, seq).logZ;
    CHECK(std::abs(dense_inside(reconstruct_pcfg(g), seq).logZ - td) < 1e-10);
    CHECK(std::abs(lpcfg_inside(cpd_to_lpcfg(g), g.E, g.start, seq).logZ - td) < 1e-10);
    CHECK(std::abs(rank_inside(compile_rank_pcfg(g), seq).logZ - td) < 1e-10);
  }
}

TEST_CASE("rank one collapses") {
  const CpdPCFG g = random_cpd_pcfg(2, 2, 1, 3, 77);
  const auto seq = testing::random_sequence(4, 3, 1);
  const double dense = dense_inside(reconstruct_pcfg(g), seq).logZ;
  CHECK(std::abs(td_inside(g, seq).logZ - dense) < 1e-10);
  CHECK(std::abs(lpcfg_inside(cpd_to_lpcfg(g), g.E, g.start, seq).logZ - dense) < 1e-10);
  // Per-span alpha in TD form is a scalar times the U column.
  const auto chart = td_inside(g, seq);
  const LogVec a = chart.alpha(0, 3);
  CHECK((a - g.U.col(0)).maxCoeff() - (a - g.U.col(0)).minCoeff() < 1e-12);
}

TEST_CASE("rank_inside") {
  SUBCASE("n = 2 base case") {
    const CpdPCFG g = random_cpd_pcfg(2, 3, 3, 4, 9);
    const RankPCFG rp = compile_rank_pcfg(g);
    const std::vector<int> seq{3, 1};
    const double expect = log_sum_exp(LogVec(rp.L() + rp.J().col(3) + rp.K().col(1)));
    CHECK(rank_inside(rp, seq).logZ == doctest::Approx(expect).epsilon(1e-13));
  }
  SUBCASE("matches enumeration") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const CpdPCFG g = random_cpd_pcfg(1, 2, 2, 3, seed + 100);
      const auto seq = testing::random_sequence(5, 3, seed);
      CHECK(std::abs(rank_inside(compile_rank_pcfg(g), seq).logZ -
                     pcfg_bruteforce(reconstruct_pcfg(g), seq).logZ) < 1e-9);
    }
  }
  SUBCASE("chart layout") {
    const CpdPCFG g = random_cpd_pcfg(2, 2, 3, 4, 3);
    const auto chart = rank_inside(compile_rank_pcfg(g), testing::random_sequence(4, 4, 2));
    CHECK(chart.alphaL(0, 1).size() == 3);
    CHECK(chart.alphaR(3, 4).size() == 3);
    CHECK(chart.alpha(1, 4).size() == 3);
    CHECK(chart.logZ <= 0);
  }
}

TEST_CASE("lpcfg and td agree on longer sentences") {
  const CpdPCFG g = random_cpd_pcfg(3, 6, 4, 10, 5);
  for (int n : {8, 12}) {
    const auto seq = testing::random_sequence(n, 10, n);
    CHECK(std::abs(lpcfg_inside(cpd_to_lpcfg(g), g.E, g.start, seq).logZ - td_inside(g, seq).logZ) < 1e-10);
  }
}

TEST_CASE("span marginals") {
  SUBCASE("n = 2") {
    const RankPCFG rp = compile_rank_pcfg(random_cpd_pcfg(2, 2, 2, 3, 1));
    CHECK(span_marginals(rp, std::vector<int>{0, 1})(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("n = 3 partitions") {
    const RankPCFG rp = compile_rank_pcfg(random_cpd_pcfg(2, 2, 2, 3, 2));
    const auto mu = span_marginals(rp, std::vector<int>{0, 1, 2});
    CHECK(mu(0, 2) + mu(1, 3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mu(0, 3) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("enumeration oracle") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const CpdPCFG g = random_cpd_pcfg(2, 2, 3, 3, seed + 200);
      const auto seq = testing::random_sequence(5, 3, seed);
      const auto mu = span_marginals(compile_rank_pcfg(g), seq);
      const auto oracle = pcfg_bruteforce(reconstruct_pcfg(g), seq);
      for (int i = 0; i < 5; ++i)
        for (int j = i + 2; j <= 5; ++j) CHECK(std::abs(mu(i, j) - oracle.marginals(i, j)) < 1e-9);
    }
  }
  SUBCASE("mass identities on a larger instance") {
    const CpdPCFG g = random_cpd_pcfg(8, 16, 16, 30, 4);
    const auto seq = testing::random_sequence(20, 30, 4);
    const auto mu = span_marginals(compile_rank_pcfg(g), seq);
    CHECK(std::abs(mu(0, 20) - 1.0) < 1e-8);
    CHECK(std::abs(total_mu(mu) - 19.0) < 1e-6);
    for (int i = 0; i < 20; ++i)
      for (int j = i + 2; j <= 20; ++j) {
        CHECK(mu(i, j) >= 0.0);
        CHECK(mu(i, j) <= 1.0 + 1e-8);
      }
  }
  SUBCASE("zero-probability sentence") {
    CpdPCFG g = random_cpd_pcfg(1, 1, 2, 3, 1);
    g.E.col(2).setConstant(kNegInf);
    CHECK_THROWS_AS(span_marginals(compile_rank_pcfg(g), std::vector<int>{2, 0}), std::runtime_error);
  }
}

TEST_CASE("mbr_decode") {
  SUBCASE("n = 3 prefers the heavier span") {
    SpanMarginals mu{3, SpanTable<double>(3, 0.0)};
    mu.mu(0, 2) = 0.7;
    mu.mu(1, 3) = 0.3;
    mu.mu(0, 3) = 1.0;
    const ParseTree t = mbr_decode(mu);
    CHECK(t.spans == std::vector<std::pair<int, int>>{{0, 3}, {0, 2}});
    CHECK(to_brackets(t) == "((0 1) 2)");
  }
  SUBCASE("n = 2") {
    SpanMarginals mu{2, SpanTable<double>(2, 1.0)};
    const ParseTree t = mbr_decode(mu);
    CHECK(t.spans == std::vector<std::pair<int, int>>{{0, 2}});
    CHECK(to_brackets(t) == "(0 1)");
  }
  SUBCASE("ties go to the smallest split") {
    SpanMarginals mu{3, SpanTable<double>(3, 0.5)};
    CHECK(to_brackets(mbr_decode(mu)) == "(0 (1 2))");
  }
  SUBCASE("exhaustive argmax and scale invariance") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0, 1);
      SpanMarginals mu{6, SpanTable<double>(6, 0.0)};
      for (int i = 0; i < 6; ++i)
        for (int j = i + 2; j <= 6; ++j) mu.mu(i, j) = u(rng);
      const ParseTree t = mbr_decode(mu);
      CHECK(t.spans.size() == 5);
      CHECK(std::abs(expected_spans(mu, t) - mbr_bruteforce(mu).objective) < 1e-12);
      SpanMarginals scaled = mu;
      for (int i = 0; i < 6; ++i)
        for (int j = i + 2; j <= 6; ++j) scaled.mu(i, j) *= 3.5;
      CHECK(mbr_decode(scaled).spans == t.spans);
    }
  }
}

TEST_CASE("brackets") {
  for (const std::string s : {"(0 1)", "((0 1) 2)", "(0 (1 2))", "((0 (1 2)) (3 4))", "0"}) {
    CHECK(to_brackets(parse_brackets(s)) == s);
  }
  const ParseTree t = parse_brackets("((0 (1 2)) (3 4))");
  CHECK(t.n == 5);
  CHECK(t.spans.size() == 4);
  CHECK(t.contains(1, 3));
  CHECK_THROWS_AS(parse_brackets("(0 1 2)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_brackets("(0 2)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_brackets("(0 1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_brackets("(0 1) x"), std::invalid_argument);
}

TEST_CASE("sentence F1") {
  const ParseTree a = parse_brackets("(((0 1) 2) 3)");
  const ParseTree b = parse_brackets("(0 (1 (2 3)))");
  CHECK(sentence_f1(a, a) == 100.0);
  CHECK(sentence_f1(a, b) == 0.0);
  CHECK(corpus_sentence_f1({a, a}, {a, b}) == 50.0);
  const ParseTree c = parse_brackets("((0 1) (2 3))");
  // a: {(0,2),(0,3)}; c: {(0,2),(2,4)}
  CHECK(sentence_f1(a, c) == doctest::Approx(50.0));
  CHECK(sentence_f1(parse_brackets("(0 1)"), parse_brackets("(0 1)")) == 100.0);
  CHECK_THROWS_AS(corpus_sentence_f1({a}, {a, b}), std::invalid_argument);
  CHECK_THROWS_AS(sentence_f1(a, parse_brackets("(0 1)")), std::invalid_argument);
}

TEST_CASE("parse_corpus is deterministic") {
  const RankPCFG rp = compile_rank_pcfg(random_cpd_pcfg(3, 6, 4, 8, 3));
  std::vector<std::vector<int>> corpus;
  for (int i = 0; i < 5; ++i) corpus.push_back(testing::random_sequence(3 + i, 8, i));
  const auto p1 = parse_corpus(rp, corpus), p2 = parse_corpus(rp, corpus);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(to_brackets(p1[i]) == to_brackets(p2[i]));
    CHECK(p1[i].spans.size() == corpus[i].size() - 1);
  }
}
