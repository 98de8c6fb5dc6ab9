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


#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rankspace/bench.hpp"
#include "rankspace/hmm_infer.hpp"
#include "rankspace/model_io.hpp"
#include "rankspace/oracle.hpp"
#include "rankspace/oracle_check.hpp"
#include "rankspace/pcfg_infer.hpp"
#include "rankspace/trainer.hpp"

namespace py = pybind11;
using namespace rankspace;

namespace {

using Seq = std::vector<int>;

// n+1 x n+1 array, entry (i, j) for width >= 2, zero elsewhere.
Matrix marginal_matrix(const SpanMarginals& mu) {
  Matrix out = Matrix::Zero(mu.n + 1, mu.n + 1);
  for (int w = 2; w <= mu.n; ++w)
    for (int i = 0; i + w <= mu.n; ++i) out(i, i + w) = static_cast<Real>(mu(i, i + w));
  return out;
}

}  // namespace

PYBIND11_MODULE(_rankspace, m) {
  m.doc() = "Rank-space inference for low-rank HMMs and PCFGs";

  py::class_<CpdHMM>(m, "CpdHMM")
      .def(py::init<>())
      .def_readwrite("start", &CpdHMM::start)
      .def_readwrite("U", &CpdHMM::U)
      .def_readwrite("V", &CpdHMM::V)
      .def_readwrite("W", &CpdHMM::W)
      .def_property_readonly("num_states", &CpdHMM::num_states)
      .def_property_readonly("rank", &CpdHMM::rank)
      .def_property_readonly("vocab_size", &CpdHMM::vocab_size);

  py::class_<CpdPCFG>(m, "CpdPCFG")
      .def(py::init<>())
      .def_readwrite("num_nt", &CpdPCFG::num_nt)
      .def_readwrite("num_pt", &CpdPCFG::num_pt)
      .def_readwrite("start", &CpdPCFG::start)
      .def_readwrite("U", &CpdPCFG::U)
      .def_readwrite("V", &CpdPCFG::V)
      .def_readwrite("W", &CpdPCFG::W)
      .def_readwrite("E", &CpdPCFG::E)
      .def_property_readonly("rank", &CpdPCFG::rank)
      .def_property_readonly("vocab_size", &CpdPCFG::vocab_size);

  py::class_<RankHMM>(m, "RankHMM");
  py::class_<RankPCFG>(m, "RankPCFG");

  m.def("random_cpd_hmm", &random_cpd_hmm, py::arg("m"), py::arg("r"), py::arg("o"), py::arg("seed"),
        py::arg("concentration") = 1.0);
  m.def("random_cpd_pcfg", &random_cpd_pcfg, py::arg("num_nt"), py::arg("num_pt"), py::arg("r"), py::arg("o"),
        py::arg("seed"), py::arg("concentration") = 1.0);
  m.def("validate", [](const CpdHMM& x) { return validate(x); });
  m.def("validate", [](const CpdPCFG& x) { return validate(x); });
  m.def("compile", &compile_rank_hmm);
  m.def("compile", &compile_rank_pcfg);

  m.def("dense_forward", [](const CpdHMM& x, const Seq& s) { return dense_forward(reconstruct_hmm(x), s, false).logZ; });
  m.def("lowrank_forward", [](const CpdHMM& x, const Seq& s) { return lowrank_forward(x, s, false).logZ; });
  m.def("rank_forward", [](const RankHMM& x, const Seq& s) { return rank_forward(x, s, false).logZ; });
  m.def("hmm_bruteforce", [](const CpdHMM& x, const Seq& s) { return hmm_bruteforce_logZ(reconstruct_hmm(x), s); });
  m.def("perplexity", [](const RankHMM& x, const std::vector<std::vector<int>>& corpus) { return perplexity(x, corpus); });

  m.def("dense_inside", [](const CpdPCFG& x, const Seq& s) { return dense_inside(reconstruct_pcfg(x), s).logZ; });
  m.def("td_inside", [](const CpdPCFG& x, const Seq& s) { return td_inside(x, s).logZ; });
  m.def("lpcfg_inside",
        [](const CpdPCFG& x, const Seq& s) { return lpcfg_inside(cpd_to_lpcfg(x), x.E, x.start, s).logZ; });
  m.def("rank_inside", [](const RankPCFG& x, const Seq& s) { return rank_inside(x, s).logZ; });
  m.def("pcfg_bruteforce", [](const CpdPCFG& x, const Seq& s) { return pcfg_bruteforce(reconstruct_pcfg(x), s).logZ; });
  m.def("span_marginals", [](const RankPCFG& x, const Seq& s) { return marginal_matrix(span_marginals(x, s)); },
        "Span marginals as an (n+1, n+1) array; entry [i, j] for j - i >= 2.");
  m.def("parse", [](const RankPCFG& x, const Seq& s) { return to_brackets(mbr_decode(span_marginals(x, s))); });
  m.def("sentence_f1", [](const std::string& pred, const std::string& gold) {
    return sentence_f1(parse_brackets(pred), parse_brackets(gold));
  });

  m.def("load_model", [](const std::string& path) -> py::object {
    return std::visit([](auto&& x) { return py::cast(x); }, load_model(path).model);
  });
  m.def("save_model", [](const CpdHMM& x, const std::string& path) { save_model({Vocab::synthetic(x.vocab_size()), x}, path); });
  m.def("save_model", [](const CpdPCFG& x, const std::string& path) { save_model({Vocab::synthetic(x.vocab_size()), x}, path); });

  m.def("sample_corpus", &sample_corpus, py::arg("model"), py::arg("eos"), py::arg("num_sentences"), py::arg("max_len"),
        py::arg("seed"));
  m.def(
      "fit_hmm",
      [](int states, int r, int o, const Corpus& train, const Corpus& val, int epochs, std::uint64_t seed) {
        TrainConfig cfg = TrainConfig::defaults(ModelKind::hmm);
        cfg.epochs = epochs;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return to_cpd_hmm(fit(init_hmm_scores(states, r, o, seed), train, val, cfg).params);
      },
      py::arg("m"), py::arg("r"), py::arg("o"), py::arg("train"), py::arg("val"), py::arg("epochs") = 30,
      py::arg("seed") = 0);
  m.def(
      "oracle_check",
      [](const std::string& kind, int cases, std::uint64_t seed) {
        if (kind != "hmm" && kind != "pcfg") throw std::invalid_argument("kind must be 'hmm' or 'pcfg'");
        const OracleCheckReport rep = oracle_check(kind == "pcfg" ? ModelKind::pcfg : ModelKind::hmm, cases, seed);
        return py::make_tuple(rep.passed(), rep.to_text());
      },
      py::arg("kind"), py::arg("cases") = 25, py::arg("seed") = 0);
  m.def("bench", [](const std::string& spec_json) { return run_grid(BenchSpec::from_json(spec_json)).to_csv(); });
}
