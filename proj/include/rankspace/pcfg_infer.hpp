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


#ifndef RANKSPACE_PCFG_INFER_HPP
#define RANKSPACE_PCFG_INFER_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankspace/chart.hpp"
#include "rankspace/grammar.hpp"

namespace rankspace {

// alpha holds spans of width >= 2 (num_nt-dimensional for state-space
// variants, r-dimensional for the rank-space one). alphaL/alphaR are filled
// only by rank_inside, including width-1 spans.
struct InsideChart {
  int n = 0;
  SpanTable<LogVec> alpha;
  SpanTable<LogVec> alphaL;
  SpanTable<LogVec> alphaR;
  Real logZ = kNegInf;
};

struct SpanMarginals {
  int n = 0;
  SpanTable<double> mu;  // meaningful for width >= 2

  double operator()(int i, int j) const { return mu(i, j); }
};

// A binary bracketing over n leaves: the n-1 spans of width >= 2, in preorder.
struct ParseTree {
  int n = 0;
  std::vector<std::pair<int, int>> spans;

  bool contains(int i, int j) const;
};

// All inside variants require n >= 2 (length-1 sentences are rejected) and
// throw std::out_of_range for token ids outside the vocabulary.
InsideChart dense_inside(const DensePCFG& model, TokenSeq seq);
InsideChart td_inside(const CpdPCFG& model, TokenSeq seq);
InsideChart lpcfg_inside(const LpcfgView& view, const LogMat& emission, const LogVec& start, TokenSeq seq);
InsideChart rank_inside(const RankPCFG& model, TokenSeq seq);

// Posterior span probabilities from a reverse sweep over the rank-space chart.
// Throws std::runtime_error for zero-probability sentences.
SpanMarginals span_marginals(const RankPCFG& model, TokenSeq seq);

// Tree maximizing the total marginal of its spans; ties go to the smallest
// split point.
ParseTree mbr_decode(const SpanMarginals& marginals);

// Sum of mu over the tree's spans.
double expected_spans(const SpanMarginals& marginals, const ParseTree& tree);

// "((0 1) 2)"; a single leaf prints as "0".
std::string to_brackets(const ParseTree& tree);
// Throws std::invalid_argument for malformed or non-binary bracketings.
ParseTree parse_brackets(const std::string& text);

// Span F1 in percent over spans of width >= 2, excluding the whole-sentence
// span. Two empty span sets score 100.
double sentence_f1(const ParseTree& predicted, const ParseTree& gold);

std::vector<ParseTree> parse_corpus(const RankPCFG& model, const std::vector<std::vector<int>>& corpus);
// Mean of sentence_f1. Throws std::invalid_argument on length mismatch.
double corpus_sentence_f1(const std::vector<ParseTree>& predicted, const std::vector<ParseTree>& gold);

namespace detail {

// Rank-space chart in scaled form, kept for the reverse sweep.
struct RankChart {
  int n = 0;
  SpanTable<ScaledVec> alpha, left, right;
  Real logZ = kNegInf;
};

// d logZ / d(compiled parameter), real domain.
struct RankPcfgGrad {
  Vector L;
  Matrix H, I, J, K;

  explicit RankPcfgGrad(int r = 0, int o = 0)
      : L(Vector::Zero(r)), H(Matrix::Zero(r, r)), I(Matrix::Zero(r, r)), J(Matrix::Zero(r, o)), K(Matrix::Zero(r, o)) {}
};

RankChart rank_inside_scaled(const RankPCFG& model, TokenSeq seq);

// Reverse sweep. Returns marginals and, if grad != nullptr, adds d logZ/d(L,H,I,J,K).
SpanMarginals rank_inside_adjoint(const RankPCFG& model, TokenSeq seq, const RankChart& chart, RankPcfgGrad* grad);

}  // namespace detail

}  // namespace rankspace

#endif  // RANKSPACE_PCFG_INFER_HPP
