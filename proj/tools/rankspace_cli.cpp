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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rankspace/bench.hpp"
#include "rankspace/corpus.hpp"
#include "rankspace/hmm_infer.hpp"
#include "rankspace/model_io.hpp"
#include "rankspace/oracle_check.hpp"
#include "rankspace/pcfg_infer.hpp"
#include "rankspace/trainer.hpp"

using namespace rankspace;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int env_workers() {
  if (const char* v = std::getenv("RANKSPACE_WORKERS")) {
    try {
      const int n = std::stoi(v);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError(fmt::format("RANKSPACE_WORKERS must be a positive integer, got '{}'", v));
  }
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout when path is "-".
void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

ModelFile load_model_or_fail(const std::string& path) {
  try {
    return parse_model(read_file(path));
  } catch (const ModelFormatError& e) {
    throw DataError(path + ": " + e.what());
  }
}

LoadedCorpus load_corpus_or_fail(const std::string& path, const Vocab& vocab, const CorpusOptions& options) {
  try {
    auto c = load_corpus(path, vocab, options);
    if (c.skipped_empty) std::cerr << fmt::format("warning: {} empty line(s) skipped in {}\n", c.skipped_empty, path);
    return c;
  } catch (const CorpusError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// Runs fn(i) for i in [0, count) on `workers` threads; results stay in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, int workers, Fn fn) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(count, 1));
  if (k <= 1) {
    run(0, count);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < k; ++c) threads.emplace_back(run, count * c / k, count * (c + 1) / k);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string num(double x) { return std::isfinite(x) ? fmt::format("{:.17g}", x) : std::string("null"); }

bool is_hmm_kind(const std::string& kind) { return kind == "cpd_hmm" || kind == "dense_hmm"; }

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string kind, out = "-";
  int m = 0, num_nt = 0, num_pt = 0, r = 0, o = 0;
  std::uint64_t seed = 0;
  double concentration = 1.0;
};

int cmd_gen(const GenArgs& a) {
  if (a.r < 1 || a.o < 2) throw UsageError("--r must be >= 1 and --o >= 2 (vocabulary holds <unk> and <eos>)");
  if (!(a.concentration > 0)) throw UsageError("--concentration must be positive");
  ModelFile file;
  file.vocab = Vocab::synthetic(a.o);
  if (is_hmm_kind(a.kind)) {
    if (a.m < 1) throw UsageError("--m must be >= 1 for HMMs");
    const CpdHMM model = random_cpd_hmm(a.m, a.r, a.o, a.seed, a.concentration);
    file.model = a.kind == "cpd_hmm" ? AnyModel(model) : AnyModel(reconstruct_hmm(model));
  } else {
    if (a.num_nt < 1 || a.num_pt < 1) throw UsageError("--num-nt and --num-pt must be >= 1 for PCFGs");
    const CpdPCFG model = random_cpd_pcfg(a.num_nt, a.num_pt, a.r, a.o, a.seed, a.concentration);
    file.model = a.kind == "cpd_pcfg" ? AnyModel(model) : AnyModel(reconstruct_pcfg(model));
  }
  write_output(a.out, serialize_model(file));
  return 0;
}

// ---------------------------------------------------------------- score

struct CorpusFlags {
  std::optional<bool> unk;
  bool lowercase = false;
  bool strip_punct = false;

  CorpusOptions options(bool default_unk, bool append_eos) const {
    CorpusOptions o;
    o.map_unk = unk.value_or(default_unk);
    o.lowercase = lowercase;
    o.strip_punct = strip_punct;
    o.append_eos = append_eos;
    return o;
  }
};

struct ScoreArgs {
  std::string model, corpus, algo = "rank", out = "-";
  CorpusFlags flags;
};

std::function<double(TokenSeq)> scorer(const AnyModel& model, const std::string& algo) {
  auto incompatible = [&] {
    return UsageError(fmt::format("algorithm '{}' cannot score a {} model", algo, model_kind(model)));
  };
  if (const auto* m = std::get_if<CpdHMM>(&model)) {
    if (algo == "dense") {
      auto d = std::make_shared<DenseJointHMM>(reconstruct_hmm(*m));
      return [d](TokenSeq s) { return dense_forward(*d, s, false).logZ; };
    }
    if (algo == "lowrank") {
      auto c = std::make_shared<CpdHMM>(*m);
      return [c](TokenSeq s) { return lowrank_forward(*c, s, false).logZ; };
    }
    if (algo == "rank") {
      auto r = std::make_shared<RankHMM>(compile_rank_hmm(*m));
      return [r](TokenSeq s) { return rank_forward(*r, s, false).logZ; };
    }
    throw incompatible();
  }
  if (const auto* m = std::get_if<DenseJointHMM>(&model)) {
    if (algo != "dense") throw incompatible();
    auto d = std::make_shared<DenseJointHMM>(*m);
    return [d](TokenSeq s) { return dense_forward(*d, s, false).logZ; };
  }
  if (const auto* m = std::get_if<CpdPCFG>(&model)) {
    auto c = std::make_shared<CpdPCFG>(*m);
    if (algo == "dense") {
      auto d = std::make_shared<DensePCFG>(reconstruct_pcfg(*m));
      return [d](TokenSeq s) { return dense_inside(*d, s).logZ; };
    }
    if (algo == "td") return [c](TokenSeq s) { return td_inside(*c, s).logZ; };
    if (algo == "lpcfg") {
      auto v = std::make_shared<LpcfgView>(cpd_to_lpcfg(*m));
      return [c, v](TokenSeq s) { return lpcfg_inside(*v, c->E, c->start, s).logZ; };
    }
    if (algo == "rank") {
      auto r = std::make_shared<RankPCFG>(compile_rank_pcfg(*m));
      return [r](TokenSeq s) { return detail::rank_inside_scaled(*r, s).logZ; };
    }
    throw incompatible();
  }
  const auto& m = std::get<DensePCFG>(model);
  if (algo != "dense") throw incompatible();
  auto d = std::make_shared<DensePCFG>(m);
  return [d](TokenSeq s) { return dense_inside(*d, s).logZ; };
}

void require_pcfg_lengths(const LoadedCorpus& c, const std::string& path) {
  for (std::size_t i = 0; i < c.sentences.size(); ++i)
    if (c.sentences[i].size() < 2)
      throw DataError(fmt::format("{}: line {}: PCFG sentences need at least 2 tokens", path, c.line_numbers[i]));
}

int cmd_score(const ScoreArgs& a) {
  const ModelFile file = load_model_or_fail(a.model);
  const bool hmm = is_hmm_kind(model_kind(file.model));
  const auto score = scorer(file.model, a.algo);
  const LoadedCorpus corpus = load_corpus_or_fail(a.corpus, file.vocab, a.flags.options(hmm, hmm));
  if (corpus.sentences.empty()) throw DataError(a.corpus + ": no sentences");
  if (!hmm) require_pcfg_lengths(corpus, a.corpus);

  const auto logz = parallel_map<double>(corpus.sentences.size(), env_workers(),
                                         [&](std::size_t i) { return static_cast<double>(score(corpus.sentences[i])); });
  std::string out;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < logz.size(); ++i) {
    if (!std::isfinite(logz[i]))
      throw DataError(fmt::format("{}: line {}: sentence has zero probability", a.corpus, corpus.line_numbers[i]));
    counts.push_back(corpus.sentences[i].size());
    out += fmt::format("{{\"index\":{},\"line\":{},\"n_tokens\":{},\"logZ\":{}}}\n", i, corpus.line_numbers[i],
                       counts.back(), num(logz[i]));
  }
  std::size_t total = 0;
  double sum = 0;
  for (std::size_t i = 0; i < logz.size(); ++i) {
    total += counts[i];
    sum += logz[i];
  }
  out += fmt::format("{{\"summary\":true,\"sentences\":{},\"total_tokens\":{},\"nll_per_token\":{},\"ppl\":{}}}\n",
                     logz.size(), total, num(-sum / static_cast<double>(total)), num(perplexity(logz, counts)));
  write_output(a.out, out);
  return 0;
}

// ---------------------------------------------------------------- parse

struct ParseArgs {
  std::string model, corpus, gold, marginals, out = "-";
  CorpusFlags flags;
};

int cmd_parse(const ParseArgs& a) {
  const ModelFile file = load_model_or_fail(a.model);
  const auto* cpd = std::get_if<CpdPCFG>(&file.model);
  if (!cpd) throw UsageError(fmt::format("parse needs a cpd_pcfg model, got {}", model_kind(file.model)));
  const LoadedCorpus corpus = load_corpus_or_fail(a.corpus, file.vocab, a.flags.options(false, false));
  require_pcfg_lengths(corpus, a.corpus);

  std::vector<ParseTree> gold;
  if (!a.gold.empty()) {
    std::istringstream in(read_file(a.gold));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        gold.push_back(parse_brackets(line));
      } catch (const std::invalid_argument& e) {
        throw DataError(fmt::format("{}: line {}: {}", a.gold, lineno, e.what()));
      }
    }
    if (gold.size() != corpus.sentences.size())
      throw DataError(fmt::format("gold has {} trees but the corpus has {} sentences", gold.size(), corpus.sentences.size()));
    for (std::size_t i = 0; i < gold.size(); ++i)
      if (gold[i].n != static_cast<int>(corpus.sentences[i].size()))
        throw DataError(fmt::format("sentence {} (line {}): gold tree spans {} tokens, sentence has {}", i,
                                    corpus.line_numbers[i], gold[i].n, corpus.sentences[i].size()));
  }

  const RankPCFG rank = compile_rank_pcfg(*cpd);
  const auto marginals = parallel_map<SpanMarginals>(corpus.sentences.size(), env_workers(), [&](std::size_t i) {
    return span_marginals(rank, corpus.sentences[i]);
  });
  std::string brackets, dump;
  std::vector<ParseTree> predicted;
  for (std::size_t s = 0; s < marginals.size(); ++s) {
    const auto& mu = marginals[s];
    predicted.push_back(mbr_decode(mu));
    brackets += to_brackets(predicted.back()) + "\n";
    if (!a.marginals.empty())
      for (int w = 2; w <= mu.n; ++w)
        for (int i = 0; i + w <= mu.n; ++i)
          dump += fmt::format("{{\"sentence\":{},\"i\":{},\"j\":{},\"mu\":{}}}\n", s, i, i + w, num(mu(i, i + w)));
  }
  write_output(a.out, brackets);
  if (!a.marginals.empty()) write_output(a.marginals, dump);
  if (!gold.empty()) std::cerr << fmt::format("S-F1: {:.4f}\n", corpus_sentence_f1(predicted, gold));
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string kind, corpus, val, config, init, out, trace;
  int m = 0, num_nt = 0, num_pt = 0, r = 0;
  std::size_t vocab_size = 0;
  double init_scale = 1.0;
  std::vector<std::uint64_t> seeds{0};
  CorpusFlags flags;
};

// Workers come from RANKSPACE_WORKERS unless the config names them.
TrainConfig load_config(const std::string& path, ModelKind kind) {
  TrainConfig c = TrainConfig::defaults(kind);
  c.workers = env_workers();
  if (path.empty()) return c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "optimizer") {
        const auto s = v.get<std::string>();
        if (s == "sgd") c.optimizer = OptimizerKind::sgd;
        else if (s == "adam") c.optimizer = OptimizerKind::adam;
        else if (s == "adamw") c.optimizer = OptimizerKind::adamw;
        else throw UsageError("config: optimizer must be sgd, adam or adamw");
      } else if (key == "lr") c.lr = v.get<double>();
      else if (key == "beta1") c.beta1 = v.get<double>();
      else if (key == "beta2") c.beta2 = v.get<double>();
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "weight_decay") c.weight_decay = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "batch_tokens") c.batch_tokens = v.get<std::size_t>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "eval_every") c.eval_every = v.get<int>();
      else if (key == "patience") c.patience = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "workers") c.workers = v.get<int>();
      else throw UsageError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  try {
    c.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
  return c;
}

std::string seed_suffixed(const std::string& path, std::uint64_t seed, bool many) {
  return many ? fmt::format("{}.seed{}", path, seed) : path;
}

int cmd_train(const TrainArgs& a, bool seed_given) {
  const ModelKind kind = a.kind == "hmm" ? ModelKind::hmm : ModelKind::pcfg;
  const bool hmm = kind == ModelKind::hmm;
  const TrainConfig base = load_config(a.config, kind);

  Vocab vocab;
  std::optional<ScoreParams> init;
  if (!a.init.empty()) {
    const ModelFile f = load_model_or_fail(a.init);
    vocab = f.vocab;
    const std::string sidecar = a.init + ".scores.json";
    if (std::filesystem::exists(sidecar)) {
      try {
        init = parse_scores(read_file(sidecar));
      } catch (const std::invalid_argument& e) {
        throw DataError(sidecar + ": " + e.what());
      }
    } else if (const auto* m = std::get_if<CpdHMM>(&f.model); m && hmm) {
      init = scores_from(*m);
    } else if (const auto* p = std::get_if<CpdPCFG>(&f.model); p && !hmm) {
      init = scores_from(*p);
    }
    if (!init || (init->kind == ModelKind::hmm) != hmm)
      throw UsageError(fmt::format("--init model kind {} does not match --kind {}", model_kind(f.model), a.kind));
  } else {
    if (a.r < 1) throw UsageError("--r must be >= 1");
    if (hmm && a.m < 1) throw UsageError("--m must be >= 1 for hmm");
    if (!hmm && (a.num_nt < 1 || a.num_pt < 1)) throw UsageError("--num-nt and --num-pt must be >= 1 for pcfg");
    try {
      vocab = build_vocab(a.corpus, a.flags.options(true, false), a.vocab_size);
    } catch (const CorpusError& e) {
      throw DataError(e.what());
    }
  }

  const CorpusOptions opts = a.flags.options(true, hmm);
  const LoadedCorpus train = load_corpus_or_fail(a.corpus, vocab, opts);
  const LoadedCorpus val = load_corpus_or_fail(a.val, vocab, opts);
  if (train.sentences.empty() || val.sentences.empty()) throw DataError("training and validation corpora must be nonempty");
  if (!hmm) {
    require_pcfg_lengths(train, a.corpus);
    require_pcfg_lengths(val, a.val);
  }

  const bool many = a.seeds.size() > 1;
  double best_sum = 0;
  for (std::uint64_t seed : a.seeds) {
    TrainConfig cfg = base;
    // --seed drives both the initialization and the batch order.
    if (seed_given) cfg.seed = seed;
    ScoreParams start = init ? *init
                             : (hmm ? init_hmm_scores(a.m, a.r, vocab.size(), seed, a.init_scale)
                                    : init_pcfg_scores(a.num_nt, a.num_pt, a.r, vocab.size(), seed, a.init_scale));
    FitResult fr;
    try {
      fr = fit(std::move(start), train.sentences, val.sentences, cfg, [&](const TraceRow& row) {
        std::cerr << fmt::format("seed {} epoch {} train_nll {:.6f} val_nll {:.6f} lr {:.3g}\n", seed, row.epoch,
                                 row.train_nll, row.val_nll, row.lr);
      });
    } catch (const TrainingDiverged& e) {
      throw DataError(e.what());
    }
    const double best = corpus_nll(fr.params, val.sentences);
    best_sum += best;
    if (!a.out.empty()) {
      ModelFile file;
      file.vocab = vocab;
      file.model = hmm ? AnyModel(to_cpd_hmm(fr.params)) : AnyModel(to_cpd_pcfg(fr.params));
      const std::string path = seed_suffixed(a.out, seed, many);
      write_output(path, serialize_model(file));
      write_output(path + ".scores.json", serialize_scores(fr.params));
    }
    if (!a.trace.empty()) write_output(seed_suffixed(a.trace, seed, many), trace_csv(fr.trace));
    std::cout << fmt::format("seed {} best_val_nll {:.6f} val_ppl {:.4f}\n", seed, best, std::exp(best));
  }
  if (many) {
    const double mean = best_sum / static_cast<double>(a.seeds.size());
    std::cout << fmt::format("mean over {} seeds: val_nll {:.6f} val_ppl {:.4f}\n", a.seeds.size(), mean, std::exp(mean));
  }
  return 0;
}

// ---------------------------------------------------------------- oracle-check / bench

int cmd_oracle_check(const std::string& kind, int cases, std::uint64_t seed, bool corrupt) {
  if (cases < 0) throw UsageError("--cases must be >= 0");
  bool ok = true;
  for (const std::string k : {"hmm", "pcfg"}) {
    if (kind != "all" && kind != k) continue;
    const auto report = oracle_check(k == "hmm" ? ModelKind::hmm : ModelKind::pcfg, cases, seed, corrupt);
    std::cout << report.to_text();
    ok = ok && report.passed();
  }
  return ok ? 0 : kExitData;
}

int cmd_bench(const std::string& spec_path, const std::string& out, bool table, int workers) {
  BenchSpec spec;
  try {
    spec = BenchSpec::from_json(read_file(spec_path));
  } catch (const std::invalid_argument& e) {
    throw UsageError(spec_path + ": " + e.what());
  }
  if (workers > 0) spec.workers = workers;
  const BenchReport report = run_grid(spec);
  write_output(out, report.to_csv());
  if (table) std::cerr << report.to_table();
  return report.complete ? 0 : kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-space inference for low-rank HMMs and PCFGs"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write a random valid model as JSON");
  g->add_option("--kind", gen.kind, "Model kind")->required()->check(CLI::IsMember({"cpd_hmm", "cpd_pcfg", "dense_hmm", "dense_pcfg"}));
  g->add_option("--m", gen.m, "Number of HMM states");
  g->add_option("--num-nt", gen.num_nt, "Number of PCFG nonterminals");
  g->add_option("--num-pt", gen.num_pt, "Number of PCFG preterminals");
  g->add_option("--r", gen.r, "Decomposition rank")->required();
  g->add_option("--o", gen.o, "Vocabulary size (includes <unk> and <eos>)")->required();
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--concentration", gen.concentration, "Dirichlet concentration");
  g->add_option("--out", gen.out, "Output path ('-' for stdout)");

  auto add_corpus_flags = [](CLI::App* sub, CorpusFlags& f) {
    sub->add_flag("--unk,!--no-unk", f.unk, "Map out-of-vocabulary tokens to <unk> (default: on for HMMs, off for PCFGs)");
    sub->add_flag("--lowercase", f.lowercase, "Lowercase tokens");
    sub->add_flag("--strip-punct", f.strip_punct, "Drop punctuation-only tokens");
  };

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Per-sentence logZ and corpus perplexity");
  s->add_option("--model", score.model, "Model JSON")->required();
  s->add_option("--corpus", score.corpus, "One sentence per line")->required();
  s->add_option("--algo", score.algo, "Inference variant")->check(CLI::IsMember({"dense", "lowrank", "td", "lpcfg", "rank"}));
  s->add_option("--out", score.out, "Output path ('-' for stdout)");
  add_corpus_flags(s, score.flags);

  ParseArgs parse;
  auto* p = app.add_subcommand("parse", "MBR bracketings from span marginals");
  p->add_option("--model", parse.model, "cpd_pcfg model JSON")->required();
  p->add_option("--corpus", parse.corpus, "One sentence per line")->required();
  p->add_option("--gold", parse.gold, "Gold brackets, one tree per line; prints S-F1 to stderr");
  p->add_option("--marginals", parse.marginals, "Write span marginals as JSON lines");
  p->add_option("--out", parse.out, "Bracket output path ('-' for stdout)");
  add_corpus_flags(p, parse.flags);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Fit a CPD model by gradient descent");
  t->add_option("--kind", train.kind, "hmm or pcfg")->required()->check(CLI::IsMember({"hmm", "pcfg"}));
  t->add_option("--corpus", train.corpus, "Training corpus")->required();
  t->add_option("--val", train.val, "Validation corpus")->required();
  t->add_option("--config", train.config, "JSON overrides for the training configuration");
  t->add_option("--init", train.init, "Start from this model (uses <init>.scores.json when present)");
  t->add_option("--m", train.m, "HMM states");
  t->add_option("--num-nt", train.num_nt, "PCFG nonterminals");
  t->add_option("--num-pt", train.num_pt, "PCFG preterminals");
  t->add_option("--r", train.r, "Rank");
  t->add_option("--vocab-size", train.vocab_size, "Cap on vocabulary size including <unk> and <eos> (0 = all)");
  t->add_option("--init-scale", train.init_scale, "Standard deviation of the initial scores");
  t->add_option("--seed", train.seeds, "Seed(s); several seeds train several models")->delimiter(',');
  t->add_option("--out", train.out, "Checkpoint path (scores written to <out>.scores.json)");
  t->add_option("--trace", train.trace, "Trace CSV path");
  add_corpus_flags(t, train.flags);

  std::string oc_kind = "all";
  int oc_cases = 25;
  std::uint64_t oc_seed = 0;
  bool oc_corrupt = false;
  auto* o = app.add_subcommand("oracle-check", "Compare every variant with exhaustive enumeration");
  o->add_option("--kind", oc_kind, "hmm, pcfg or all")->check(CLI::IsMember({"hmm", "pcfg", "all"}));
  o->add_option("--cases", oc_cases, "Random cases per kind");
  o->add_option("--seed", oc_seed, "Random seed");
  o->add_flag("--corrupt", oc_corrupt, "Perturb each model so validation fails");

  std::string bench_spec, bench_out = "-";
  bool bench_table = false;
  int bench_workers = 0;
  auto* b = app.add_subcommand("bench", "Timing grid with log-log slope fits");
  b->add_option("--spec", bench_spec, "Grid spec JSON")->required();
  b->add_option("--out", bench_out, "CSV output path ('-' for stdout)");
  b->add_flag("--table", bench_table, "Also print a table to stderr");
  b->add_option("--workers", bench_workers, "Add multi-worker throughput rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*s) return cmd_score(score);
    if (*p) return cmd_parse(parse);
    if (*t) return cmd_train(train, t->count("--seed") > 0);
    if (*o) return cmd_oracle_check(oc_kind, oc_cases, oc_seed, oc_corrupt);
    if (*b) return cmd_bench(bench_spec, bench_out, bench_table, bench_workers);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
