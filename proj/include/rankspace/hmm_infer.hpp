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


#ifndef RANKSPACE_HMM_INFER_HPP
#define RANKSPACE_HMM_INFER_HPP

#include <span>
#include <vector>

#include "rankspace/grammar.hpp"

namespace rankspace {

// messages[t] is the log forward message after consuming token t (dimension
// m for state-space variants, r for the rank-space variant). Left empty when
// the caller only asks for logZ.
struct ForwardTrellis {
  std::vector<LogVec> messages;
  Real logZ = kNegInf;
};

// gamma(t, q): posterior log-probability of rank q at token t.
struct PosteriorRanks {
  LogMat gamma;
  Real logZ = kNegInf;
};

// O(n m^2) forward pass over the merged transition/emission tensor.
ForwardTrellis dense_forward(const DenseJointHMM& model, TokenSeq seq, bool keep_messages = true);

// O(n m r) forward pass through the factorization, staying in state space.
ForwardTrellis lowrank_forward(const CpdHMM& model, TokenSeq seq, bool keep_messages = true);

// O(n r^2) forward pass over the compiled rank-space chain.
ForwardTrellis rank_forward(const RankHMM& model, TokenSeq seq, bool keep_messages = true);

// Backward messages b[t] (log), with b[n-1] = 0.
std::vector<LogVec> rank_backward_messages(const RankHMM& model, TokenSeq seq);

// Throws std::runtime_error("zero-probability sequence") when logZ == -inf.
PosteriorRanks rank_backward(const RankHMM& model, TokenSeq seq);

// exp(-sum logZ / sum tokens). Throws std::invalid_argument on an empty corpus.
double perplexity(std::span<const double> log_z, std::span<const std::size_t> token_counts);
double perplexity(const RankHMM& model, const std::vector<std::vector<int>>& corpus);

}  // namespace rankspace

#endif  // RANKSPACE_HMM_INFER_HPP
