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
#include <functional>

#include "doctest.h"
#include "rankspace/hmm_infer.hpp"
#include "rankspace/oracle.hpp"
#include "test_util.hpp"

using namespace rankspace;

namespace {

// Exhaustive sum over rank sequences of the compiled chain, probability domain.
// Returns logZ and per-position rank posteriors.
std::pair<double, std::vector<std::vector<double>>> rank_chain_oracle(const RankHMM& m, const std::vector<int>& seq) {
  const int r = m.rank(), n = static_cast<int>(seq.size());
  std::vector<int> q(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<double>> post(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(r), 0.0));
  double z = 0;
  while (true) {
    double p = std::exp(m.pi()[q[0]]) * std::exp(m.emission()(q[0], seq[0]));
    for (int t = 1; t < n; ++t) p *= std::exp(m.transition()(q[t - 1], q[t])) * std::exp(m.emission()(q[t], seq[t]));
    z += p;
    for (int t = 0; t < n; ++t) post[t][q[t]] += p;
    int pos = 0;
    while (pos < n && ++q[pos] == r) q[pos++] = 0;
    if (pos == n) break;
  }
  for (auto& row : post)
    for (auto& x : row) x /= z;
  return {std::log(z), post};
}

}  // namespace

TEST_CASE("dense_forward single-state chain") {
  DenseJointHMM d;
  d.start = LogVec::Zero(1);
  d.by_word = {LogMat::Constant(1, 1, std::log(0.6)), LogMat::Constant(1, 1, std::log(0.4))};
  // token 0 plays "w", token 1 plays eos
  const std::vector<int> seq{0, 0, 1};
  CHECK(dense_forward(d, seq).logZ == doctest::Approx(std::log(0.6 * 0.6 * 0.4)).epsilon(1e-14));
}

TEST_CASE("dense_forward uniform model") {
  const int m = 3, o = 5;
  DenseJointHMM d;
  d.start = testing::log_uniform(1, m).row(0).transpose();
  d.by_word.assign(o, LogMat::Constant(m, m, std::log(1.0 / (m * o))));
  for (int n = 1; n <= 6; ++n) {
    const auto seq = testing::random_sequence(n, o, n);
    CHECK(dense_forward(d, seq).logZ == doctest::Approx(n * std::log(1.0 / o)).epsilon(1e-13));
  }
}

TEST_CASE("dense_forward matches exhaustive enumeration") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DenseJointHMM d = reconstruct_hmm(random_cpd_hmm(3, 2, 4, seed));
    const auto seq = testing::random_sequence(5, 4, seed + 1000);
    CHECK(std::abs(dense_forward(d, seq).logZ - hmm_bruteforce_logZ(d, seq)) < 1e-10);
  }
}

TEST_CASE("lowrank_forward") {
  SUBCASE("equals dense on the reconstruction") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const CpdHMM h = random_cpd_hmm(4, 1 + seed % 3, 6, seed);
      const auto seq = testing::random_sequence(7, 6, seed);
      CHECK(std::abs(lowrank_forward(h, seq).logZ - dense_forward(reconstruct_hmm(h), seq).logZ) < 1e-10);
    }
  }
  SUBCASE("uniform emission") {
    CpdHMM h;
    h.start = testing::log_uniform(1, 2).row(0).transpose();
    h.U = testing::log_uniform(2, 2);
    h.V = testing::log_uniform(2, 2);
    h.W = testing::log_uniform(2, 2);
    const std::vector<int> seq{0, 1, 1};
    CHECK(lowrank_forward(h, seq).logZ == doctest::Approx(3 * std::log(0.5)).epsilon(1e-14));
  }
  SUBCASE("messages are state-space") {
    const CpdHMM h = random_cpd_hmm(5, 2, 3, 1);
    const auto tr = lowrank_forward(h, std::vector<int>{0, 1, 2});
    CHECK(tr.messages.size() == 3);
    CHECK(tr.messages[0].size() == 5);
  }
}

TEST_CASE("rank_forward") {
  SUBCASE("rank one is a scalar chain") {
    const CpdHMM h = random_cpd_hmm(3, 1, 5, 2);
    const RankHMM rh = compile_rank_hmm(h);
    const std::vector<int> seq{1, 3, 4, 0};
    double expect = 0;
    for (int w : seq) expect += h.W(0, w);
    CHECK(rank_forward(rh, seq).logZ == doctest::Approx(expect).epsilon(1e-13));
  }
  SUBCASE("three-way equivalence") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CpdHMM h = random_cpd_hmm(2 + seed % 5, 1 + seed % 4, 5, seed);
      const auto seq = testing::random_sequence(1 + seed % 9, 5, seed + 7);
      const double low = lowrank_forward(h, seq).logZ;
      CHECK(std::abs(rank_forward(compile_rank_hmm(h), seq).logZ - low) < 1e-10);
      CHECK(std::abs(dense_forward(reconstruct_hmm(h), seq).logZ - low) < 1e-10);
    }
  }
  SUBCASE("exhaustive oracle on small instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const int m = 1 + seed % 4, r = 1 + seed % 3, o = 2 + seed % 3, n = 1 + seed % 6;
      const CpdHMM h = random_cpd_hmm(m, r, o, seed * 31);
      const auto seq = testing::random_sequence(n, o, seed);
      CHECK(std::abs(rank_forward(compile_rank_hmm(h), seq).logZ - hmm_bruteforce_logZ(reconstruct_hmm(h), seq)) < 1e-9);
    }
  }
  SUBCASE("eos-only sentence") {
    const CpdHMM h = random_cpd_hmm(3, 2, 4, 5);
    const RankHMM rh = compile_rank_hmm(h);
    const std::vector<int> seq{1};
    CHECK(rank_forward(rh, seq).logZ == doctest::Approx(log_sum_exp(LogVec(rh.pi() + rh.emission().col(1)))));
  }
  SUBCASE("prefix mass is non-increasing") {
    const RankHMM rh = compile_rank_hmm(random_cpd_hmm(6, 3, 7, 12));
    const auto tr = rank_forward(rh, testing::random_sequence(30, 7, 3));
    for (std::size_t t = 1; t < tr.messages.size(); ++t)
      CHECK(log_sum_exp(tr.messages[t]) <= log_sum_exp(tr.messages[t - 1]) + 1e-12);
  }
  SUBCASE("out-of-vocabulary id") {
    const RankHMM rh = compile_rank_hmm(random_cpd_hmm(2, 2, 3, 1));
    CHECK_THROWS_AS(rank_forward(rh, std::vector<int>{0, 3}), std::out_of_range);
    CHECK_THROWS_AS(dense_forward(reconstruct_hmm(random_cpd_hmm(2, 2, 3, 1)), std::vector<int>{-1}), std::out_of_range);
  }
  SUBCASE("zero-probability token propagates -inf") {
    CpdHMM h = random_cpd_hmm(2, 2, 3, 1);
    h.W.col(2).setConstant(kNegInf);
    const auto tr = rank_forward(compile_rank_hmm(h), std::vector<int>{0, 2, 1});
    CHECK(tr.logZ == kNegInf);
    CHECK(is_log_valid(tr.messages.back()));
  }
}

TEST_CASE("rank_backward posteriors") {
  SUBCASE("rank one") {
    const RankHMM rh = compile_rank_hmm(random_cpd_hmm(3, 1, 4, 1));
    const auto post = rank_backward(rh, std::vector<int>{0, 2, 3});
    CHECK(post.gamma.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("single step") {
    const RankHMM rh = compile_rank_hmm(random_cpd_hmm(3, 3, 4, 2));
    const std::vector<int> seq{2};
    const auto post = rank_backward(rh, seq);
    for (int q = 0; q < 3; ++q)
      CHECK(post.gamma(0, q) == doctest::Approx(rh.pi()[q] + rh.emission()(q, 2) - post.logZ).epsilon(1e-13));
  }
  SUBCASE("exhaustive posterior oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const RankHMM rh = compile_rank_hmm(random_cpd_hmm(3, 3, 4, seed + 5));
      const auto seq = testing::random_sequence(5, 4, seed);
      const auto post = rank_backward(rh, seq);
      const auto [logz, oracle] = rank_chain_oracle(rh, seq);
      CHECK(std::abs(post.logZ - logz) < 1e-10);
      for (int t = 0; t < 5; ++t) {
        CHECK(std::abs(std::exp(log_sum_exp(Vector(post.gamma.row(t).transpose()))) - 1.0) < 1e-8);
        for (int q = 0; q < 3; ++q) CHECK(std::abs(std::exp(post.gamma(t, q)) - oracle[t][q]) < 1e-9);
      }
    }
  }
  SUBCASE("zero-probability sequence") {
    CpdHMM h = random_cpd_hmm(2, 2, 3, 1);
    h.W.col(2).setConstant(kNegInf);
    CHECK_THROWS_WITH_AS(rank_backward(compile_rank_hmm(h), std::vector<int>{2}), "zero-probability sequence",
                         std::runtime_error);
  }
}

TEST_CASE("perplexity") {
  const int o = 10;
  CpdHMM h;
  h.start = testing::log_uniform(1, 3).row(0).transpose();
  h.U = testing::log_uniform(3, 2);
  h.V = testing::log_uniform(2, 3);
  h.W = testing::log_uniform(2, o);
  const std::vector<std::vector<int>> corpus{{1, 2, 3}, {4, 1}, {1}};
  CHECK(perplexity(compile_rank_hmm(h), corpus) == doctest::Approx(10.0).epsilon(1e-12));

  const std::vector<double> lz{std::log(0.25)};
  const std::vector<std::size_t> counts{2};
  CHECK(perplexity(lz, counts) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(perplexity(std::vector<double>{}, std::vector<std::size_t>{}), std::invalid_argument);
}
