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


#include "rankspace/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rankspace/hmm_infer.hpp"
#include "rankspace/pcfg_infer.hpp"

namespace rankspace {

namespace {

Matrix row_log_softmax(const Matrix& s) {
  Matrix out(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const Vector row = s.row(i).transpose();
    out.row(i) = (row.array() - log_sum_exp(row)).transpose();
  }
  return out;
}

Matrix row_softmax(const Matrix& s) {
  return row_log_softmax(s).unaryExpr([](Real v) { return std::exp(v); });
}

// Pulls a gradient taken w.r.t. the probabilities p = softmax(s) back to s.
Matrix softmax_backward(const Matrix& p, const Matrix& g) {
  Matrix out(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const Real dot = p.row(i).dot(g.row(i));
    out.row(i) = p.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
  }
  return out;
}

LogMat safe_log(const Matrix& x) {
  return x.unaryExpr([](Real v) { return v > 0 ? std::log(v) : kNegInf; });
}

Matrix normal_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = static_cast<Real>(dist(rng));
  return out;
}

Matrix floored(const LogMat& m, double floor) {
  return m.unaryExpr([floor](Real v) { return v == kNegInf ? static_cast<Real>(floor) : v; });
}

std::vector<Matrix*> groups(ScoreParams& p) { return {&p.start, &p.U, &p.V, &p.W, &p.E}; }
std::vector<const Matrix*> groups(const ScoreParams& p) { return {&p.start, &p.U, &p.V, &p.W, &p.E}; }

// Real-domain gradients of sum logZ w.r.t. the compiled rank-space tables.
struct HmmRankGrad {
  Vector pi;
  Matrix A, W;
  double logz_sum = 0;
  std::size_t tokens = 0;

  HmmRankGrad(int r, int o) : pi(Vector::Zero(r)), A(Matrix::Zero(r, r)), W(Matrix::Zero(r, o)) {}
  void merge(const HmmRankGrad& other) {
    pi += other.pi;
    A += other.A;
    W += other.W;
    logz_sum += other.logz_sum;
    tokens += other.tokens;
  }
};

void hmm_sentence_grad(const RankHMM& model, TokenSeq seq, std::size_t index, HmmRankGrad& g) {
  const ForwardTrellis fwd = rank_forward(model, seq);
  if (fwd.logZ == kNegInf) throw std::runtime_error(fmt::format("sentence {} in batch has zero probability", index));
  const auto b = rank_backward_messages(model, seq);
  const LogMat& w = model.emission();
  const Real logz = fwd.logZ;
  const std::size_t n = seq.size();
  LogVec pre = model.pi();  // message before the emission at position t
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) pre = model.exp_transition().apply_transpose(ScaledVec::from_log(fwd.messages[t - 1])).to_log();
    g.W.col(seq[t]) += (pre + b[t]).array().unaryExpr([logz](Real x) { return std::exp(x - logz); }).matrix();
    if (t == 0) g.pi += (w.col(seq[0]) + b[0]).array().unaryExpr([logz](Real x) { return std::exp(x - logz); }).matrix();
    if (t + 1 < n) {
      const ScaledVec left = ScaledVec::from_log(fwd.messages[t]);
      const ScaledVec right = ScaledVec::from_log(LogVec(w.col(seq[t + 1]) + b[t + 1]));
      const Real s = left.log_scale + right.log_scale - logz;
      if (left.log_scale > kNegInf && right.log_scale > kNegInf)
        g.A.noalias() += std::exp(s) * left.value * right.value.transpose();
    }
  }
  g.logz_sum += logz;
  g.tokens += n;
}

struct PcfgAcc {
  detail::RankPcfgGrad grad;
  double logz_sum = 0;
  std::size_t tokens = 0;

  PcfgAcc(int r, int o) : grad(r, o) {}
  void merge(const PcfgAcc& other) {
    grad.L += other.grad.L;
    grad.H += other.grad.H;
    grad.I += other.grad.I;
    grad.J += other.grad.J;
    grad.K += other.grad.K;
    logz_sum += other.logz_sum;
    tokens += other.tokens;
  }
};

void pcfg_sentence_grad(const RankPCFG& model, TokenSeq seq, std::size_t index, PcfgAcc& acc) {
  const detail::RankChart chart = detail::rank_inside_scaled(model, seq);
  if (chart.logZ == kNegInf) throw std::runtime_error(fmt::format("sentence {} in batch has zero probability", index));
  detail::rank_inside_adjoint(model, seq, chart, &acc.grad);
  acc.logz_sum += chart.logZ;
  acc.tokens += seq.size();
}

// Runs fn(i, acc) over contiguous chunks of [0, count) and merges the
// per-chunk accumulators in chunk order.
template <class Acc, class Make, class Fn>
Acc chunked(std::size_t count, int workers, Make make, Fn fn) {
  const std::size_t k = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count));
  std::vector<Acc> parts;
  parts.reserve(k);
  for (std::size_t c = 0; c < k; ++c) parts.push_back(make());
  std::vector<std::exception_ptr> errors(k);
  auto run = [&](std::size_t c) {
    try {
      const std::size_t lo = count * c / k, hi = count * (c + 1) / k;
      for (std::size_t i = lo; i < hi; ++i) fn(i, parts[c]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (k == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < k; ++c) threads.emplace_back(run, c);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (std::size_t c = 1; c < k; ++c) parts[0].merge(parts[c]);
  return std::move(parts[0]);
}

LossGrad hmm_loss_and_grad(const ScoreParams& params, const std::vector<TokenSeq>& batch, int workers) {
  const Matrix ps = row_softmax(params.start), pu = row_softmax(params.U), pv = row_softmax(params.V),
               pw = row_softmax(params.W);
  const int r = static_cast<int>(pu.cols()), o = static_cast<int>(pw.cols());
  const Vector pi = pu.transpose() * ps.row(0).transpose();
  const Matrix a = pv * pu;
  const RankHMM model(safe_log(pi), safe_log(a), safe_log(pw));

  const HmmRankGrad g = chunked<HmmRankGrad>(
      batch.size(), workers, [&] { return HmmRankGrad(r, o); },
      [&](std::size_t i, HmmRankGrad& acc) { hmm_sentence_grad(model, batch[i], i, acc); });

  const Real scale = -1.0 / static_cast<Real>(g.tokens);
  LossGrad out;
  out.tokens = g.tokens;
  out.nll = -g.logz_sum / static_cast<double>(g.tokens);
  out.grad = params.zeros_like();
  const Matrix gs = (pu * g.pi).transpose();
  const Matrix gu = ps.row(0).transpose() * g.pi.transpose() + pv.transpose() * g.A;
  const Matrix gv = g.A * pu.transpose();
  out.grad.start = softmax_backward(ps, scale * gs);
  out.grad.U = softmax_backward(pu, scale * gu);
  out.grad.V = softmax_backward(pv, scale * gv);
  out.grad.W = softmax_backward(pw, scale * g.W);
  return out;
}

LossGrad pcfg_loss_and_grad(const ScoreParams& params, const std::vector<TokenSeq>& batch, int workers) {
  const int nt = params.num_nt, pt = params.num_pt;
  const Matrix ps = row_softmax(params.start), pu = row_softmax(params.U), pv = row_softmax(params.V),
               pw = row_softmax(params.W), pe = row_softmax(params.E);
  const int r = static_cast<int>(pu.cols()), o = static_cast<int>(pe.cols());
  const Matrix v_nt = pv.leftCols(nt), w_nt = pw.leftCols(nt);
  const Matrix v_pt = pv.middleCols(nt, pt), w_pt = pw.middleCols(nt, pt);
  const Vector l = pu.transpose() * ps.row(0).transpose();
  const RankPCFG model(safe_log(l), safe_log(v_nt * pu), safe_log(w_nt * pu), safe_log(v_pt * pe),
                       safe_log(w_pt * pe));

  const PcfgAcc acc = chunked<PcfgAcc>(
      batch.size(), workers, [&] { return PcfgAcc(r, o); },
      [&](std::size_t i, PcfgAcc& a) { pcfg_sentence_grad(model, batch[i], i, a); });
  const auto& g = acc.grad;

  const Real scale = -1.0 / static_cast<Real>(acc.tokens);
  LossGrad out;
  out.tokens = acc.tokens;
  out.nll = -acc.logz_sum / static_cast<double>(acc.tokens);
  out.grad = params.zeros_like();
  const Matrix gs = (pu * g.L).transpose();
  const Matrix gu = ps.row(0).transpose() * g.L.transpose() + v_nt.transpose() * g.H + w_nt.transpose() * g.I;
  Matrix gv(r, nt + pt), gw(r, nt + pt);
  gv << g.H * pu.transpose(), g.J * pe.transpose();
  gw << g.I * pu.transpose(), g.K * pe.transpose();
  const Matrix ge = v_pt.transpose() * g.J + w_pt.transpose() * g.K;
  out.grad.start = softmax_backward(ps, scale * gs);
  out.grad.U = softmax_backward(pu, scale * gu);
  out.grad.V = softmax_backward(pv, scale * gv);
  out.grad.W = softmax_backward(pw, scale * gw);
  out.grad.E = softmax_backward(pe, scale * ge);
  return out;
}

std::vector<TokenSeq> views(const Corpus& corpus, const std::vector<std::size_t>& idx) {
  std::vector<TokenSeq> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.emplace_back(corpus[i]);
  return out;
}

// Sentences shuffled, then stably sorted by length so each batch holds
// similar lengths; batch order is shuffled again.
std::vector<std::vector<std::size_t>> make_batches(const Corpus& corpus, std::size_t batch_tokens, std::mt19937_64& rng) {
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corpus[a].size() < corpus[b].size(); });
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> cur;
  std::size_t tokens = 0;
  for (std::size_t i : order) {
    if (!cur.empty() && tokens + corpus[i].size() > batch_tokens) {
      batches.push_back(std::move(cur));
      cur.clear();
      tokens = 0;
    }
    cur.push_back(i);
    tokens += corpus[i].size();
  }
  if (!cur.empty()) batches.push_back(std::move(cur));
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

nlohmann::json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<Real>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<Real>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw std::invalid_argument("scores: data length mismatch");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  if (!m.allFinite()) throw std::invalid_argument("scores: non-finite entry");
  return m;
}

constexpr const char* kGroupNames[] = {"start", "U", "V", "W", "E"};

}  // namespace

Eigen::Index ScoreParams::size() const {
  Eigen::Index n = 0;
  for (const Matrix* g : groups(*this)) n += g->size();
  return n;
}

Vector ScoreParams::flatten() const {
  Vector out(size());
  Eigen::Index at = 0;
  for (const Matrix* g : groups(*this)) {
    out.segment(at, g->size()) = Eigen::Map<const Vector>(g->data(), g->size());
    at += g->size();
  }
  return out;
}

void ScoreParams::assign(const Vector& flat) {
  if (flat.size() != size()) throw std::invalid_argument("ScoreParams::assign: size mismatch");
  Eigen::Index at = 0;
  for (Matrix* g : groups(*this)) {
    Eigen::Map<Vector>(g->data(), g->size()) = flat.segment(at, g->size());
    at += g->size();
  }
}

ScoreParams ScoreParams::zeros_like() const {
  ScoreParams out = *this;
  for (Matrix* g : groups(out)) g->setZero();
  return out;
}

ScoreParams init_hmm_scores(int m, int r, int o, std::uint64_t seed, double scale) {
  if (m < 1 || r < 1 || o < 1) throw std::invalid_argument("init_hmm_scores: sizes must be positive");
  std::mt19937_64 rng(seed);
  ScoreParams p;
  p.kind = ModelKind::hmm;
  p.start = normal_matrix(rng, 1, m, scale);
  p.U = normal_matrix(rng, m, r, scale);
  p.V = normal_matrix(rng, r, m, scale);
  p.W = normal_matrix(rng, r, o, scale);
  p.E = Matrix(0, 0);
  return p;
}

ScoreParams init_pcfg_scores(int num_nt, int num_pt, int r, int o, std::uint64_t seed, double scale) {
  if (num_nt < 1 || num_pt < 1 || r < 1 || o < 1) throw std::invalid_argument("init_pcfg_scores: sizes must be positive");
  std::mt19937_64 rng(seed);
  ScoreParams p;
  p.kind = ModelKind::pcfg;
  p.num_nt = num_nt;
  p.num_pt = num_pt;
  p.start = normal_matrix(rng, 1, num_nt, scale);
  p.U = normal_matrix(rng, num_nt, r, scale);
  p.V = normal_matrix(rng, r, num_nt + num_pt, scale);
  p.W = normal_matrix(rng, r, num_nt + num_pt, scale);
  p.E = normal_matrix(rng, num_pt, o, scale);
  return p;
}

CpdHMM to_cpd_hmm(const ScoreParams& params) {
  if (params.kind != ModelKind::hmm) throw std::invalid_argument("to_cpd_hmm: scores are not for an HMM");
  CpdHMM m;
  m.start = row_log_softmax(params.start).row(0).transpose();
  m.U = row_log_softmax(params.U);
  m.V = row_log_softmax(params.V);
  m.W = row_log_softmax(params.W);
  return m;
}

CpdPCFG to_cpd_pcfg(const ScoreParams& params) {
  if (params.kind != ModelKind::pcfg) throw std::invalid_argument("to_cpd_pcfg: scores are not for a PCFG");
  CpdPCFG m;
  m.num_nt = params.num_nt;
  m.num_pt = params.num_pt;
  m.start = row_log_softmax(params.start).row(0).transpose();
  m.U = row_log_softmax(params.U);
  m.V = row_log_softmax(params.V);
  m.W = row_log_softmax(params.W);
  m.E = row_log_softmax(params.E);
  return m;
}

ScoreParams scores_from(const CpdHMM& model, double floor) {
  ScoreParams p;
  p.kind = ModelKind::hmm;
  p.start = floored(LogMat(model.start.transpose()), floor);
  p.U = floored(model.U, floor);
  p.V = floored(model.V, floor);
  p.W = floored(model.W, floor);
  p.E = Matrix(0, 0);
  return p;
}

ScoreParams scores_from(const CpdPCFG& model, double floor) {
  ScoreParams p;
  p.kind = ModelKind::pcfg;
  p.num_nt = model.num_nt;
  p.num_pt = model.num_pt;
  p.start = floored(LogMat(model.start.transpose()), floor);
  p.U = floored(model.U, floor);
  p.V = floored(model.V, floor);
  p.W = floored(model.W, floor);
  p.E = floored(model.E, floor);
  return p;
}

LossGrad loss_and_grad(const ScoreParams& params, const std::vector<TokenSeq>& batch, int workers) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  return params.kind == ModelKind::hmm ? hmm_loss_and_grad(params, batch, workers)
                                       : pcfg_loss_and_grad(params, batch, workers);
}

double corpus_nll(const ScoreParams& params, const Corpus& corpus) {
  if (corpus.empty()) throw std::invalid_argument("corpus_nll: empty corpus");
  double total = 0;
  std::size_t tokens = 0;
  if (params.kind == ModelKind::hmm) {
    const RankHMM model = compile_rank_hmm(to_cpd_hmm(params));
    for (const auto& s : corpus) total -= rank_forward(model, s).logZ;
  } else {
    const RankPCFG model = compile_rank_pcfg(to_cpd_pcfg(params));
    for (const auto& s : corpus) total -= detail::rank_inside_scaled(model, s).logZ;
  }
  for (const auto& s : corpus) tokens += s.size();
  return total / static_cast<double>(tokens);
}

TrainConfig TrainConfig::defaults(ModelKind kind) {
  TrainConfig c;
  if (kind == ModelKind::pcfg) {
    c.optimizer = OptimizerKind::adam;
    c.lr = 2e-3;
    c.beta1 = 0.75;
    c.beta2 = 0.999;
  }
  return c;
}

void TrainConfig::check() const {
  if (!(lr >= 0) || !std::isfinite(lr)) throw std::invalid_argument("TrainConfig: lr must be finite and >= 0");
  if (!(beta1 >= 0 && beta1 < 1)) throw std::invalid_argument("TrainConfig: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) throw std::invalid_argument("TrainConfig: beta2 must lie in [0, 1)");
  if (!(eps > 0)) throw std::invalid_argument("TrainConfig: eps must be positive");
  if (!(weight_decay >= 0)) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (batch_tokens < 1) throw std::invalid_argument("TrainConfig: batch_tokens must be positive");
  if (!(clip_norm >= 0)) throw std::invalid_argument("TrainConfig: clip_norm must be >= 0 (0 disables)");
  if (eval_every < 1) throw std::invalid_argument("TrainConfig: eval_every must be positive");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be positive");
  if (workers < 1) throw std::invalid_argument("TrainConfig: workers must be positive");
}

FitResult fit(ScoreParams init, const Corpus& train, const Corpus& val, const TrainConfig& config,
              const EpochCallback& on_epoch) {
  config.check();
  if (train.empty()) throw std::invalid_argument("fit: empty training corpus");
  if (val.empty()) throw std::invalid_argument("fit: empty validation corpus");

  ScoreParams params = std::move(init);
  Vector theta = params.flatten();
  Vector m1 = Vector::Zero(theta.size()), m2 = Vector::Zero(theta.size());
  FitResult result;
  result.params = params;
  double best_val = corpus_nll(params, val);
  double lr = config.lr;
  int stale = 0;
  std::size_t step = 0;
  std::mt19937_64 rng(config.seed);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double nll_sum = 0;
    std::size_t tok_sum = 0;
    for (const auto& idx : make_batches(train, config.batch_tokens, rng)) {
      ++step;
      LossGrad lg = loss_and_grad(params, views(train, idx), config.workers);
      Vector g = lg.grad.flatten();
      if (!std::isfinite(lg.nll) || !g.allFinite())
        throw TrainingDiverged(step, fmt::format("training diverged at step {} (epoch {})", step, epoch));
      const Real norm = g.norm();
      if (config.clip_norm > 0 && norm > config.clip_norm) g *= static_cast<Real>(config.clip_norm) / norm;
      switch (config.optimizer) {
        case OptimizerKind::sgd:
          if (config.weight_decay > 0) g += static_cast<Real>(config.weight_decay) * theta;
          theta -= static_cast<Real>(lr) * g;
          break;
        case OptimizerKind::adam:
        case OptimizerKind::adamw: {
          if (config.optimizer == OptimizerKind::adam && config.weight_decay > 0)
            g += static_cast<Real>(config.weight_decay) * theta;
          if (config.optimizer == OptimizerKind::adamw) theta *= static_cast<Real>(1.0 - lr * config.weight_decay);
          const Real b1 = static_cast<Real>(config.beta1), b2 = static_cast<Real>(config.beta2);
          m1 = b1 * m1 + (1 - b1) * g;
          m2 = b2 * m2 + (1 - b2) * g.cwiseAbs2();
          const Real c1 = 1 - std::pow(b1, static_cast<Real>(step));
          const Real c2 = 1 - std::pow(b2, static_cast<Real>(step));
          theta.array() -= static_cast<Real>(lr) * (m1.array() / c1) /
                           ((m2.array() / c2).sqrt() + static_cast<Real>(config.eps));
          break;
        }
      }
      params.assign(theta);
      nll_sum += lg.nll * static_cast<double>(lg.tokens);
      tok_sum += lg.tokens;
    }

    TraceRow row;
    row.epoch = epoch;
    row.train_nll = nll_sum / static_cast<double>(tok_sum);
    row.lr = lr;
    row.val_nll = std::numeric_limits<double>::quiet_NaN();
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      row.val_nll = corpus_nll(params, val);
      if (std::isnan(row.val_nll)) throw TrainingDiverged(step, fmt::format("validation nll is NaN after step {}", step));
      if (row.val_nll < best_val) {
        best_val = row.val_nll;
        result.params = params;
        stale = 0;
      } else if (++stale >= config.patience) {
        lr *= 0.5;
        stale = 0;
      }
    }
    result.trace.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  return result;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "epoch,train_nll,val_nll,lr\n";
  for (const auto& r : trace)
    out += fmt::format("{},{:.17g},{},{:.17g}\n", r.epoch, r.train_nll,
                       std::isnan(r.val_nll) ? std::string() : fmt::format("{:.17g}", r.val_nll), r.lr);
  return out;
}

Corpus sample_corpus(const CpdHMM& model, int eos, int num_sentences, int max_len, std::uint64_t seed) {
  if (eos < 0 || eos >= model.vocab_size()) throw std::invalid_argument("sample_corpus: eos id out of range");
  if (num_sentences < 0 || max_len < 1) throw std::invalid_argument("sample_corpus: bad sizes");
  if ((model.W.col(eos).array() == kNegInf).all())
    throw std::runtime_error("sample_corpus: eos has zero emission probability under every rank");

  auto rows = [](const LogMat& m) {
    std::vector<std::discrete_distribution<int>> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> w(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index j = 0; j < m.cols(); ++j) w[static_cast<std::size_t>(j)] = std::exp(static_cast<double>(m(i, j)));
      out.emplace_back(w.begin(), w.end());
    }
    return out;
  };
  auto start = rows(LogMat(model.start.transpose()));
  auto u = rows(model.U), v = rows(model.V), w = rows(model.W);

  constexpr int kMaxRedraws = 1000;
  std::mt19937_64 rng(seed);
  Corpus corpus;
  corpus.reserve(static_cast<std::size_t>(num_sentences));
  int redraws = 0;
  while (static_cast<int>(corpus.size()) < num_sentences) {
    std::vector<int> sent;
    int state = start[0](rng);
    bool done = false;
    while (static_cast<int>(sent.size()) < max_len) {
      const int q = u[static_cast<std::size_t>(state)](rng);
      const int word = w[static_cast<std::size_t>(q)](rng);
      sent.push_back(word);
      if (word == eos) {
        done = true;
        break;
      }
      state = v[static_cast<std::size_t>(q)](rng);
    }
    if (done) {
      corpus.push_back(std::move(sent));
      redraws = 0;
    } else if (++redraws > kMaxRedraws) {
      throw std::runtime_error(
          fmt::format("sample_corpus: {} consecutive sentences reached max_len {}; eos looks unreachable", redraws, max_len));
    }
  }
  return corpus;
}

std::string serialize_scores(const ScoreParams& params) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["kind"] = params.kind == ModelKind::hmm ? "hmm_scores" : "pcfg_scores";
  j["num_nt"] = params.num_nt;
  j["num_pt"] = params.num_pt;
  const auto gs = groups(params);
  for (std::size_t i = 0; i < gs.size(); ++i) j["groups"][kGroupNames[i]] = matrix_json(*gs[i]);
  return j.dump() + "\n";
}

ScoreParams parse_scores(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw std::invalid_argument("scores: unsupported format_version");
    const auto kind = j.at("kind").get<std::string>();
    ScoreParams p;
    if (kind == "hmm_scores") {
      p.kind = ModelKind::hmm;
    } else if (kind == "pcfg_scores") {
      p.kind = ModelKind::pcfg;
    } else {
      throw std::invalid_argument("scores: unknown kind " + kind);
    }
    p.num_nt = j.at("num_nt").get<int>();
    p.num_pt = j.at("num_pt").get<int>();
    auto gs = groups(p);
    for (std::size_t i = 0; i < gs.size(); ++i) *gs[i] = matrix_from_json(j.at("groups").at(kGroupNames[i]));
    const auto m = p.start.cols();
    const bool ok = p.kind == ModelKind::hmm
                        ? (p.start.rows() == 1 && p.U.rows() == m && p.V.rows() == p.U.cols() && p.V.cols() == m &&
                           p.W.rows() == p.U.cols() && p.E.size() == 0)
                        : (p.start.rows() == 1 && m == p.num_nt && p.U.rows() == m && p.V.rows() == p.U.cols() &&
                           p.V.cols() == p.num_nt + p.num_pt && p.W.rows() == p.U.cols() && p.W.cols() == p.V.cols() &&
                           p.E.rows() == p.num_pt);
    if (!ok) throw std::invalid_argument("scores: group shapes are inconsistent");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scores: ") + e.what());
  }
}

}  // namespace rankspace
