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


#ifndef RANKSPACE_GRAMMAR_HPP
#define RANKSPACE_GRAMMAR_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankspace/logsemiring.hpp"

namespace rankspace {

// Vocabulary ids of one sentence.
using TokenSeq = std::span<const int>;

// Ordered token list with reserved unk and eos entries.
class Vocab {
 public:
  Vocab() = default;
  // Throws std::invalid_argument unless tokens are distinct and contain unk
  // and eos.
  Vocab(std::vector<std::string> tokens, std::string unk = "<unk>", std::string eos = "<eos>");

  // "<unk>", "<eos>", then w2 ... w{o-1}.
  static Vocab synthetic(int size);

  int size() const { return static_cast<int>(tokens_.size()); }
  int unk() const { return unk_; }
  int eos() const { return eos_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(const std::string& token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int unk_ = -1;
  int eos_ = -1;
};

// HMM with the transition and emission merged into one factor:
// T[a][b][w] = log p(next state b, word w | state a). Stored word-major so the
// forward kernel reads one m x m slice per token.
struct DenseJointHMM {
  LogVec start;                  // m
  std::vector<LogMat> by_word;   // o slices, each m x m

  int num_states() const { return static_cast<int>(start.size()); }
  int vocab_size() const { return static_cast<int>(by_word.size()); }
  Real T(int a, int b, int w) const { return by_word[static_cast<std::size_t>(w)](a, b); }
};

// CPD-factored HMM: T[a][b][w] = sum_q U[a][q] V[q][b] W[q][w].
// U rows are p(rank | state); V rows p(next state | rank); W rows p(word | rank).
struct CpdHMM {
  LogVec start;  // m
  LogMat U;      // m x r
  LogMat V;      // r x m
  LogMat W;      // r x o

  int num_states() const { return static_cast<int>(start.size()); }
  int rank() const { return static_cast<int>(U.cols()); }
  int vocab_size() const { return static_cast<int>(W.cols()); }
};

// HMM over rank variables obtained by marginalizing every state node.
class RankHMM {
 public:
  RankHMM() = default;
  RankHMM(LogVec pi, LogMat transition, LogMat emission);

  const LogVec& pi() const { return pi_; }
  const LogMat& transition() const { return a_; }
  const LogMat& emission() const { return w_; }
  const ExpMatrix& exp_transition() const { return a_exp_; }
  // Row w holds the emission column W[:, w].
  const ExpMatrix& exp_emission_by_word() const { return w_exp_t_; }

  int rank() const { return static_cast<int>(pi_.size()); }
  int vocab_size() const { return static_cast<int>(w_.cols()); }

 private:
  LogVec pi_;   // r
  LogMat a_;    // r x r, A[q][q'] = log sum_b p(b|q) p(q'|b)
  LogMat w_;    // r x o
  ExpMatrix a_exp_;
  ExpMatrix w_exp_t_;
};

// Symbols are laid out nonterminals first: [0, num_nt) are nonterminals,
// [num_nt, num_nt + num_pt) preterminals.
struct CpdPCFG {
  int num_nt = 0;
  int num_pt = 0;
  LogVec start;  // num_nt
  LogMat U;      // num_nt x r   p(rank | parent)
  LogMat V;      // r x m        p(left child | rank)
  LogMat W;      // r x m        p(right child | rank)
  LogMat E;      // num_pt x o   p(word | preterminal)

  int num_symbols() const { return num_nt + num_pt; }
  int rank() const { return static_cast<int>(U.cols()); }
  int vocab_size() const { return static_cast<int>(E.cols()); }
};

struct DensePCFG {
  int num_nt = 0;
  int num_pt = 0;
  LogVec start;     // num_nt
  LogMat binary;    // num_nt x (m*m), binary(a, b*m + c)
  LogMat emission;  // num_pt x o

  int num_symbols() const { return num_nt + num_pt; }
  int vocab_size() const { return static_cast<int>(emission.cols()); }
  Real rule(int a, int b, int c) const { return binary(a, static_cast<Eigen::Index>(b) * num_symbols() + c); }
};

// U plus V' (r x m x m, stored r x (m*m)) with V'[q][b][c] = V[q][b] + W[q][c].
struct LpcfgView {
  LogMat U;       // num_nt x r
  LogMat Vprime;  // r x (m*m)

  int rank() const { return static_cast<int>(U.cols()); }
  int num_nt() const { return static_cast<int>(U.rows()); }
};

// Rank-space PCFG: H = V U^T, I = W U^T over nonterminal children, J = V E^T,
// K = W E^T over preterminal children, L = (U^T s).
class RankPCFG {
 public:
  RankPCFG() = default;
  RankPCFG(LogVec L, LogMat H, LogMat I, LogMat J, LogMat K);

  const LogVec& L() const { return l_; }
  const LogMat& H() const { return h_; }
  const LogMat& I() const { return i_; }
  const LogMat& J() const { return j_; }
  const LogMat& K() const { return k_; }
  const ExpMatrix& exp_H() const { return h_exp_; }
  const ExpMatrix& exp_I() const { return i_exp_; }

  int rank() const { return static_cast<int>(l_.size()); }
  int vocab_size() const { return static_cast<int>(j_.cols()); }

 private:
  LogVec l_;
  LogMat h_, i_, j_, k_;
  ExpMatrix h_exp_, i_exp_;
};

inline constexpr double kValidityTol = 1e-9;

// Each returned string names the offending row or axis; empty means valid.
std::vector<std::string> validate(const CpdHMM& model, double tol = kValidityTol);
std::vector<std::string> validate(const DenseJointHMM& model, double tol = kValidityTol);
std::vector<std::string> validate(const RankHMM& model, double tol = kValidityTol);
std::vector<std::string> validate(const CpdPCFG& model, double tol = kValidityTol);
std::vector<std::string> validate(const DensePCFG& model, double tol = kValidityTol);
std::vector<std::string> validate(const LpcfgView& view, double tol = kValidityTol);
std::vector<std::string> validate(const RankPCFG& model, double tol = kValidityTol);

// Every distribution row is a symmetric Dirichlet(concentration) draw.
// Deterministic for fixed arguments. Throws std::invalid_argument on zero sizes.
CpdHMM random_cpd_hmm(int m, int r, int o, std::uint64_t seed, double concentration = 1.0);
CpdPCFG random_cpd_pcfg(int num_nt, int num_pt, int r, int o, std::uint64_t seed,
                        double concentration = 1.0);

DenseJointHMM reconstruct_hmm(const CpdHMM& model);
DensePCFG reconstruct_pcfg(const CpdPCFG& model);
LpcfgView cpd_to_lpcfg(const CpdPCFG& model);
RankPCFG compile_rank_pcfg(const CpdPCFG& model);
RankHMM compile_rank_hmm(const CpdHMM& model);

}  // namespace rankspace

#endif  // RANKSPACE_GRAMMAR_HPP
