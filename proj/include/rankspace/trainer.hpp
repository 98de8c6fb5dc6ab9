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


#ifndef RANKSPACE_TRAINER_HPP
#define RANKSPACE_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankspace/grammar.hpp"

namespace rankspace {

using Corpus = std::vector<std::vector<int>>;

enum class ModelKind { hmm, pcfg };

// Unconstrained scores; each row of each group is pushed through a softmax.
// HMM: start (1 x m), U (m x r), V (r x m), W (r x o); E is empty.
// PCFG: start (1 x num_nt), U (num_nt x r), V, W (r x m), E (num_pt x o).
struct ScoreParams {
  ModelKind kind = ModelKind::hmm;
  int num_nt = 0;
  int num_pt = 0;
  Matrix start, U, V, W, E;

  Eigen::Index size() const;
  Vector flatten() const;
  void assign(const Vector& flat);
  ScoreParams zeros_like() const;
};

ScoreParams init_hmm_scores(int m, int r, int o, std::uint64_t seed, double scale = 1.0);
ScoreParams init_pcfg_scores(int num_nt, int num_pt, int r, int o, std::uint64_t seed, double scale = 1.0);

// Row-wise log-softmax of every group.
CpdHMM to_cpd_hmm(const ScoreParams& params);
CpdPCFG to_cpd_pcfg(const ScoreParams& params);

// Scores whose softmax reproduces the model; -inf entries become `floor`.
ScoreParams scores_from(const CpdHMM& model, double floor = -50.0);
ScoreParams scores_from(const CpdPCFG& model, double floor = -50.0);

struct LossGrad {
  double nll = 0;  // -sum logZ / sum tokens
  std::size_t tokens = 0;
  ScoreParams grad;
};

// Throws std::runtime_error naming the batch position of a zero-probability
// sentence and std::invalid_argument on an empty batch.
LossGrad loss_and_grad(const ScoreParams& params, const std::vector<TokenSeq>& batch, int workers = 1);
double corpus_nll(const ScoreParams& params, const Corpus& corpus);

enum class OptimizerKind { sgd, adam, adamw };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adamw;
  double lr = 1e-3;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  int epochs = 30;
  std::size_t batch_tokens = 256;
  double clip_norm = 5.0;
  int eval_every = 1;  // epochs
  int patience = 2;
  std::uint64_t seed = 0;
  int workers = 1;

  static TrainConfig defaults(ModelKind kind);
  // Throws std::invalid_argument describing the first bad field.
  void check() const;
};

struct TraceRow {
  int epoch = 0;
  double train_nll = 0;
  double val_nll = 0;
  double lr = 0;
};

struct FitResult {
  ScoreParams params;  // best validation point
  std::vector<TraceRow> trace;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t step, const std::string& what) : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

using EpochCallback = std::function<void(const TraceRow&)>;

FitResult fit(ScoreParams init, const Corpus& train, const Corpus& val, const TrainConfig& config,
              const EpochCallback& on_epoch = {});

std::string trace_csv(const std::vector<TraceRow>& trace);

// Ancestral sampling until `eos` is emitted. Sentences reaching max_len are
// dropped and redrawn; throws std::runtime_error after too many redraws.
Corpus sample_corpus(const CpdHMM& model, int eos, int num_sentences, int max_len, std::uint64_t seed);

std::string serialize_scores(const ScoreParams& params);
ScoreParams parse_scores(const std::string& text);

}  // namespace rankspace

#endif  // RANKSPACE_TRAINER_HPP
