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


#include "rankspace/grammar.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

namespace rankspace {

Vocab::Vocab(std::vector<std::string> tokens, std::string unk, std::string eos) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw std::invalid_argument(fmt::format("vocab: duplicate token '{}'", tokens_[i]));
  }
  auto u = find(unk);
  auto e = find(eos);
  if (!u || !e) throw std::invalid_argument("vocab: unk and eos tokens are required");
  if (tokens_.size() < 2) throw std::invalid_argument("vocab: size must be at least 2");
  unk_ = *u;
  eos_ = *e;
}

Vocab Vocab::synthetic(int size) {
  if (size < 2) throw std::invalid_argument("vocab: size must be at least 2");
  std::vector<std::string> tokens{"<unk>", "<eos>"};
  for (int i = 2; i < size; ++i) tokens.push_back(fmt::format("w{}", i));
  return Vocab(std::move(tokens));
}

std::optional<int> Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

RankHMM::RankHMM(LogVec pi, LogMat transition, LogMat emission)
    : pi_(std::move(pi)), a_(std::move(transition)), w_(std::move(emission)), a_exp_(a_), w_exp_t_(LogMat(w_.transpose())) {
  if (a_.rows() != pi_.size() || a_.cols() != pi_.size() || w_.rows() != pi_.size())
    throw std::invalid_argument("RankHMM: inconsistent dimensions");
}

RankPCFG::RankPCFG(LogVec L, LogMat H, LogMat I, LogMat J, LogMat K)
    : l_(std::move(L)), h_(std::move(H)), i_(std::move(I)), j_(std::move(J)), k_(std::move(K)),
      h_exp_(h_), i_exp_(i_) {
  const auto r = l_.size();
  if (h_.rows() != r || h_.cols() != r || i_.rows() != r || i_.cols() != r || j_.rows() != r ||
      k_.rows() != r || j_.cols() != k_.cols())
    throw std::invalid_argument("RankPCFG: inconsistent dimensions");
}

namespace {

void check_rows(const LogMat& m, const char* name, double tol, std::vector<std::string>& out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Vector row = m.row(i).transpose();
    if (!is_log_valid(row)) {
      out.push_back(fmt::format("{} row {}: NaN or +inf entry", name, i));
      continue;
    }
    const double mass = std::exp(static_cast<double>(log_sum_exp(row)));
    if (std::abs(mass - 1.0) > tol)
      out.push_back(fmt::format("{} row {}: mass {:.12g} (expected 1)", name, i, mass));
  }
}

void check_vec(const LogVec& v, const char* name, double tol, std::vector<std::string>& out) {
  check_rows(LogMat(v.transpose()), name, tol, out);
}

void check_finite(const LogMat& m, const char* name, std::vector<std::string>& out) {
  if (!is_log_valid(m)) out.push_back(fmt::format("{}: NaN or +inf entry", name));
}

void check_shape(const LogMat& m, Eigen::Index rows, Eigen::Index cols, const char* name,
                 std::vector<std::string>& out) {
  if (m.rows() != rows || m.cols() != cols)
    out.push_back(fmt::format("{}: shape {}x{} (expected {}x{})", name, m.rows(), m.cols(), rows, cols));
}

// out(i, j) = log sum_k exp(a(i, k) + b(k, j)), exact per-entry max shift.
LogMat log_matmul(const LogMat& a, const LogMat& b) {
  LogMat out(a.rows(), b.cols());
  std::vector<Real> terms(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      for (Eigen::Index k = 0; k < a.cols(); ++k) terms[static_cast<std::size_t>(k)] = a(i, k) + b(k, j);
      out(i, j) = log_sum_exp(terms);
    }
  return out;
}

class DirichletRows {
 public:
  DirichletRows(std::uint64_t seed, double concentration) : rng_(seed), gamma_(concentration, 1.0) {}

  LogMat draw(int rows, int cols) {
    LogMat out(rows, cols);
    std::vector<double> g(static_cast<std::size_t>(cols));
    for (int i = 0; i < rows; ++i) {
      double total = 0;
      do {
        total = 0;
        for (auto& x : g) total += (x = gamma_(rng_));
      } while (!(total > 0));
      for (int j = 0; j < cols; ++j)
        out(i, j) = static_cast<Real>(std::log(g[static_cast<std::size_t>(j)]) - std::log(total));
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
  std::gamma_distribution<double> gamma_;
};

}  // namespace

std::vector<std::string> validate(const CpdHMM& model, double tol) {
  std::vector<std::string> out;
  const auto m = model.start.size();
  const auto r = model.U.cols();
  if (m < 1 || r < 1) out.push_back("dims: m and r must be positive");
  check_shape(model.U, m, r, "U", out);
  check_shape(model.V, r, m, "V", out);
  if (model.W.rows() != r) out.push_back("W: row count differs from rank");
  if (!out.empty()) return out;
  check_vec(model.start, "start", tol, out);
  check_rows(model.U, "U", tol, out);
  check_rows(model.V, "V", tol, out);
  check_rows(model.W, "W", tol, out);
  return out;
}

std::vector<std::string> validate(const DenseJointHMM& model, double tol) {
  std::vector<std::string> out;
  const auto m = model.start.size();
  if (m < 1 || model.by_word.empty()) out.push_back("dims: m and o must be positive");
  for (const auto& slice : model.by_word) check_shape(slice, m, m, "T slice", out);
  if (!out.empty()) return out;
  check_vec(model.start, "start", tol, out);
  for (Eigen::Index a = 0; a < m; ++a) {
    std::vector<Real> terms;
    terms.reserve(static_cast<std::size_t>(m) * model.by_word.size());
    for (const auto& slice : model.by_word)
      for (Eigen::Index b = 0; b < m; ++b) terms.push_back(slice(a, b));
    if (!is_log_valid(terms)) {
      out.push_back(fmt::format("T state {}: NaN or +inf entry", a));
      continue;
    }
    const double mass = std::exp(static_cast<double>(log_sum_exp(terms)));
    if (std::abs(mass - 1.0) > tol) out.push_back(fmt::format("T state {}: mass {:.12g} (expected 1)", a, mass));
  }
  return out;
}

std::vector<std::string> validate(const RankHMM& model, double tol) {
  std::vector<std::string> out;
  check_vec(model.pi(), "pi_r", tol, out);
  check_rows(model.transition(), "A_r", tol, out);
  check_rows(model.emission(), "W", tol, out);
  return out;
}

std::vector<std::string> validate(const CpdPCFG& model, double tol) {
  std::vector<std::string> out;
  const auto r = model.U.cols();
  const auto m = model.num_symbols();
  if (model.num_nt < 1 || model.num_pt < 1 || r < 1) out.push_back("dims: num_nt, num_pt and r must be positive");
  if (model.start.size() != model.num_nt) out.push_back("start: length differs from num_nt");
  check_shape(model.U, model.num_nt, r, "U", out);
  check_shape(model.V, r, m, "V", out);
  check_shape(model.W, r, m, "W", out);
  if (model.E.rows() != model.num_pt) out.push_back("E: row count differs from num_pt");
  if (!out.empty()) return out;
  check_vec(model.start, "start", tol, out);
  check_rows(model.U, "U", tol, out);
  check_rows(model.V, "V", tol, out);
  check_rows(model.W, "W", tol, out);
  check_rows(model.E, "E", tol, out);
  return out;
}

std::vector<std::string> validate(const DensePCFG& model, double tol) {
  std::vector<std::string> out;
  const auto m = model.num_symbols();
  if (model.num_nt < 1 || model.num_pt < 1) out.push_back("dims: num_nt and num_pt must be positive");
  if (model.start.size() != model.num_nt) out.push_back("start: length differs from num_nt");
  check_shape(model.binary, model.num_nt, static_cast<Eigen::Index>(m) * m, "binary", out);
  if (model.emission.rows() != model.num_pt) out.push_back("emission: row count differs from num_pt");
  if (!out.empty()) return out;
  check_vec(model.start, "start", tol, out);
  check_rows(model.binary, "binary", tol, out);
  check_rows(model.emission, "emission", tol, out);
  return out;
}

std::vector<std::string> validate(const LpcfgView& view, double tol) {
  (void)tol;
  std::vector<std::string> out;
  const auto r = view.U.cols();
  if (view.Vprime.rows() != r) out.push_back("Vprime: leading dimension differs from rank");
  const auto mm = view.Vprime.cols();
  const auto m = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(mm))));
  if (m * m != mm) out.push_back("Vprime: trailing dimensions are not square");
  check_finite(view.U, "U", out);
  check_finite(view.Vprime, "Vprime", out);
  return out;
}

std::vector<std::string> validate(const RankPCFG& model, double tol) {
  (void)tol;
  std::vector<std::string> out;
  if (!is_log_valid(model.L())) out.push_back("L: NaN or +inf entry");
  check_finite(model.H(), "H", out);
  check_finite(model.I(), "I", out);
  check_finite(model.J(), "J", out);
  check_finite(model.K(), "K", out);
  return out;
}

CpdHMM random_cpd_hmm(int m, int r, int o, std::uint64_t seed, double concentration) {
  if (m < 1 || r < 1 || o < 1) throw std::invalid_argument("random_cpd_hmm: sizes must be positive");
  if (!(concentration > 0)) throw std::invalid_argument("random_cpd_hmm: concentration must be positive");
  DirichletRows rows(seed, concentration);
  CpdHMM model;
  model.start = rows.draw(1, m).row(0).transpose();
  model.U = rows.draw(m, r);
  model.V = rows.draw(r, m);
  model.W = rows.draw(r, o);
  return model;
}

CpdPCFG random_cpd_pcfg(int num_nt, int num_pt, int r, int o, std::uint64_t seed, double concentration) {
  if (num_nt < 1 || num_pt < 1 || r < 1 || o < 1)
    throw std::invalid_argument("random_cpd_pcfg: sizes must be positive");
  if (!(concentration > 0)) throw std::invalid_argument("random_cpd_pcfg: concentration must be positive");
  DirichletRows rows(seed, concentration);
  CpdPCFG model;
  model.num_nt = num_nt;
  model.num_pt = num_pt;
  model.start = rows.draw(1, num_nt).row(0).transpose();
  model.U = rows.draw(num_nt, r);
  model.V = rows.draw(r, num_nt + num_pt);
  model.W = rows.draw(r, num_nt + num_pt);
  model.E = rows.draw(num_pt, o);
  return model;
}

DenseJointHMM reconstruct_hmm(const CpdHMM& model) {
  const int m = model.num_states(), r = model.rank(), o = model.vocab_size();
  DenseJointHMM out;
  out.start = model.start;
  out.by_word.assign(static_cast<std::size_t>(o), LogMat(m, m));
  std::vector<Real> terms(static_cast<std::size_t>(r));
  for (int w = 0; w < o; ++w)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        for (int q = 0; q < r; ++q) terms[static_cast<std::size_t>(q)] = model.U(a, q) + model.V(q, b) + model.W(q, w);
        out.by_word[static_cast<std::size_t>(w)](a, b) = log_sum_exp(terms);
      }
  return out;
}

DensePCFG reconstruct_pcfg(const CpdPCFG& model) {
  const int m = model.num_symbols(), r = model.rank();
  DensePCFG out;
  out.num_nt = model.num_nt;
  out.num_pt = model.num_pt;
  out.start = model.start;
  out.emission = model.E;
  out.binary.resize(model.num_nt, static_cast<Eigen::Index>(m) * m);
  std::vector<Real> terms(static_cast<std::size_t>(r));
  for (int a = 0; a < model.num_nt; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        for (int q = 0; q < r; ++q) terms[static_cast<std::size_t>(q)] = model.U(a, q) + model.V(q, b) + model.W(q, c);
        out.binary(a, static_cast<Eigen::Index>(b) * m + c) = log_sum_exp(terms);
      }
  return out;
}

LpcfgView cpd_to_lpcfg(const CpdPCFG& model) {
  const int m = model.num_symbols(), r = model.rank();
  LpcfgView view;
  view.U = model.U;
  view.Vprime.resize(r, static_cast<Eigen::Index>(m) * m);
  for (int q = 0; q < r; ++q)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) view.Vprime(q, static_cast<Eigen::Index>(b) * m + c) = model.V(q, b) + model.W(q, c);
  return view;
}

RankPCFG compile_rank_pcfg(const CpdPCFG& model) {
  const int nt = model.num_nt, pt = model.num_pt;
  const LogMat v_nt = model.V.leftCols(nt), w_nt = model.W.leftCols(nt);
  const LogMat v_pt = model.V.middleCols(nt, pt), w_pt = model.W.middleCols(nt, pt);
  LogMat H = log_matmul(v_nt, model.U);
  LogMat I = log_matmul(w_nt, model.U);
  LogMat J = log_matmul(v_pt, model.E);
  LogMat K = log_matmul(w_pt, model.E);
  LogVec L = log_matmul(LogMat(model.start.transpose()), model.U).row(0).transpose();
  return RankPCFG(std::move(L), std::move(H), std::move(I), std::move(J), std::move(K));
}

RankHMM compile_rank_hmm(const CpdHMM& model) {
  LogVec pi = log_matmul(LogMat(model.start.transpose()), model.U).row(0).transpose();
  LogMat A = log_matmul(model.V, model.U);
  return RankHMM(std::move(pi), std::move(A), model.W);
}

}  // namespace rankspace
