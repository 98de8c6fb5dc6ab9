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


#include "rankspace/hmm_infer.hpp"

#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace rankspace {

namespace {

void check_tokens(TokenSeq seq, int vocab_size) {
  if (seq.empty()) throw std::invalid_argument("empty token sequence");
  for (std::size_t t = 0; t < seq.size(); ++t)
    if (seq[t] < 0 || seq[t] >= vocab_size)
      throw std::out_of_range(fmt::format("token id {} at position {} outside vocabulary of size {}", seq[t], t,
                                          vocab_size));
}

// Elementwise product of two scaled vectors.
ScaledVec times(const ScaledVec& a, const ScaledVec& b) {
  return ScaledVec::from_real(a.value.cwiseProduct(b.value), a.log_scale + b.log_scale);
}

Real total_log(const ScaledVec& v) { return v.log_scale == kNegInf ? kNegInf : v.log_scale + std::log(v.value.sum()); }

}  // namespace

ForwardTrellis dense_forward(const DenseJointHMM& model, TokenSeq seq, bool keep_messages) {
  check_tokens(seq, model.vocab_size());
  ForwardTrellis out;
  if (keep_messages) out.messages.reserve(seq.size());
  // f[b] = log sum_a exp(f_prev[a] + T[a][b][w]) == (T_w)^T applied to f_prev.
  // Slices are exponentiated once per distinct word in the sentence.
  std::map<int, ExpMatrix> slices;
  ScaledVec f = ScaledVec::from_log(model.start);
  for (int w : seq) {
    auto it = slices.find(w);
    if (it == slices.end()) it = slices.emplace(w, ExpMatrix(model.by_word[static_cast<std::size_t>(w)])).first;
    f = it->second.apply_transpose(f);
    if (keep_messages) out.messages.push_back(f.to_log());
  }
  out.logZ = total_log(f);
  return out;
}

ForwardTrellis lowrank_forward(const CpdHMM& model, TokenSeq seq, bool keep_messages) {
  check_tokens(seq, model.vocab_size());
  const ExpMatrix u(model.U);  // m x r
  const ExpMatrix v(model.V);  // r x m
  ForwardTrellis out;
  if (keep_messages) out.messages.reserve(seq.size());
  ScaledVec f = ScaledVec::from_log(model.start);
  for (int w : seq) {
    // Emission applied in rank space before projecting back through V.
    f = v.apply_transpose(times(u.apply_transpose(f), ScaledVec::from_log(model.W.col(w))));
    if (keep_messages) out.messages.push_back(f.to_log());
  }
  out.logZ = total_log(f);
  return out;
}

ForwardTrellis rank_forward(const RankHMM& model, TokenSeq seq, bool keep_messages) {
  check_tokens(seq, model.vocab_size());
  const ExpMatrix& a = model.exp_transition();
  const ExpMatrix& em = model.exp_emission_by_word();
  auto emission = [&](int w) { return ScaledVec{em.row_log_scale()[w], em.value().row(w).transpose()}; };
  ForwardTrellis out;
  if (keep_messages) out.messages.reserve(seq.size());
  ScaledVec h = times(ScaledVec::from_log(model.pi()), emission(seq[0]));
  if (keep_messages) out.messages.push_back(h.to_log());
  for (std::size_t t = 1; t < seq.size(); ++t) {
    h = times(a.apply_transpose(h), emission(seq[t]));
    if (keep_messages) out.messages.push_back(h.to_log());
  }
  out.logZ = total_log(h);
  return out;
}

std::vector<LogVec> rank_backward_messages(const RankHMM& model, TokenSeq seq) {
  check_tokens(seq, model.vocab_size());
  const ExpMatrix& a = model.exp_transition();
  const LogMat& w = model.emission();
  const std::size_t n = seq.size();
  std::vector<LogVec> b(n);
  b[n - 1] = LogVec::Zero(model.rank());
  for (std::size_t t = n - 1; t-- > 0;) {
    // b_t[q] = log sum_q' A[q][q'] W[q'][w_{t+1}] b_{t+1}[q']
    b[t] = a.apply(ScaledVec::from_log(b[t + 1] + w.col(seq[t + 1]))).to_log();
  }
  return b;
}

PosteriorRanks rank_backward(const RankHMM& model, TokenSeq seq) {
  const ForwardTrellis fwd = rank_forward(model, seq);
  if (fwd.logZ == kNegInf) throw std::runtime_error("zero-probability sequence");
  const auto b = rank_backward_messages(model, seq);
  PosteriorRanks out;
  out.logZ = fwd.logZ;
  out.gamma.resize(static_cast<Eigen::Index>(seq.size()), model.rank());
  for (std::size_t t = 0; t < seq.size(); ++t)
    out.gamma.row(static_cast<Eigen::Index>(t)) = (fwd.messages[t] + b[t]).array() - fwd.logZ;
  return out;
}

double perplexity(std::span<const double> log_z, std::span<const std::size_t> token_counts) {
  if (log_z.empty()) throw std::invalid_argument("perplexity: empty corpus");
  if (log_z.size() != token_counts.size()) throw std::invalid_argument("perplexity: size mismatch");
  double total = 0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < log_z.size(); ++i) {
    total += log_z[i];
    tokens += token_counts[i];
  }
  if (tokens == 0) throw std::invalid_argument("perplexity: empty corpus");
  return std::exp(-total / static_cast<double>(tokens));
}

double perplexity(const RankHMM& model, const std::vector<std::vector<int>>& corpus) {
  std::vector<double> log_z;
  std::vector<std::size_t> counts;
  for (const auto& s : corpus) {
    log_z.push_back(rank_forward(model, s, false).logZ);
    counts.push_back(s.size());
  }
  return perplexity(log_z, counts);
}

}  // namespace rankspace
