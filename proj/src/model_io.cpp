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


#include "rankspace/model_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace rankspace {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append_number(std::string& out, Real x) {
  if (x == kNegInf) {
    out += "null";
  } else {
    out += fmt::format("{:.17g}", static_cast<double>(x));
  }
}

void append_array(std::string& out, const char* name, const Real* data, Eigen::Index size, bool last) {
  out += fmt::format("    \"{}\": [", name);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (i) out += ", ";
    append_number(out, data[i]);
  }
  out += last ? "]\n" : "],\n";
}

void append_array(std::string& out, const char* name, const Matrix& m, bool last) {
  append_array(out, name, m.data(), m.size(), last);
}

void append_array(std::string& out, const char* name, const Vector& v, bool last) {
  append_array(out, name, v.data(), v.size(), last);
}

Matrix read_array(const json& params, const char* name, Eigen::Index rows, Eigen::Index cols) {
  if (!params.contains(name)) throw ModelFormatError(fmt::format("missing parameter array '{}'", name));
  const auto& arr = params.at(name);
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw ModelFormatError(fmt::format("parameter '{}' must hold {} entries", name, rows * cols));
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows * cols; ++i) {
    const auto& x = arr[static_cast<std::size_t>(i)];
    if (x.is_null()) {
      out.data()[i] = kNegInf;
    } else if (x.is_number()) {
      out.data()[i] = static_cast<Real>(x.get<double>());
    } else {
      throw ModelFormatError(fmt::format("parameter '{}' entry {} is not a number", name, i));
    }
  }
  return out;
}

int read_dim(const json& dims, const char* name) {
  if (!dims.contains(name) || !dims.at(name).is_number_integer())
    throw ModelFormatError(fmt::format("missing integer dimension '{}'", name));
  const int v = dims.at(name).get<int>();
  if (v < 1) throw ModelFormatError(fmt::format("dimension '{}' must be positive", name));
  return v;
}

}  // namespace

std::string model_kind(const AnyModel& model) {
  return std::visit(Overloaded{[](const CpdHMM&) { return std::string("cpd_hmm"); },
                               [](const CpdPCFG&) { return std::string("cpd_pcfg"); },
                               [](const DenseJointHMM&) { return std::string("dense_hmm"); },
                               [](const DensePCFG&) { return std::string("dense_pcfg"); }},
                    model);
}

std::string serialize_model(const ModelFile& file) {
  std::string out = "{\n";
  out += fmt::format("  \"format_version\": {},\n", kModelFormatVersion);
  out += fmt::format("  \"kind\": \"{}\",\n", model_kind(file.model));
  out += "  \"dims\": ";
  json dims = std::visit(
      Overloaded{
          [](const CpdHMM& m) { return json{{"m", m.num_states()}, {"r", m.rank()}, {"o", m.vocab_size()}}; },
          [](const CpdPCFG& m) {
            return json{{"num_nt", m.num_nt}, {"num_pt", m.num_pt}, {"r", m.rank()}, {"o", m.vocab_size()}};
          },
          [](const DenseJointHMM& m) { return json{{"m", m.num_states()}, {"o", m.vocab_size()}}; },
          [](const DensePCFG& m) { return json{{"num_nt", m.num_nt}, {"num_pt", m.num_pt}, {"o", m.vocab_size()}}; }},
      file.model);
  out += dims.dump() + ",\n";
  out += "  \"vocab\": " + json(file.vocab.tokens()).dump() + ",\n";
  out += "  \"params\": {\n";
  std::visit(Overloaded{[&](const CpdHMM& m) {
                          append_array(out, "start", m.start, false);
                          append_array(out, "U", m.U, false);
                          append_array(out, "V", m.V, false);
                          append_array(out, "W", m.W, true);
                        },
                        [&](const CpdPCFG& m) {
                          append_array(out, "start", m.start, false);
                          append_array(out, "U", m.U, false);
                          append_array(out, "V", m.V, false);
                          append_array(out, "W", m.W, false);
                          append_array(out, "E", m.E, true);
                        },
                        [&](const DenseJointHMM& m) {
                          append_array(out, "start", m.start, false);
                          // T[a][b][w], row-major.
                          const int n = m.num_states(), o = m.vocab_size();
                          Vector t(static_cast<Eigen::Index>(n) * n * o);
                          Eigen::Index k = 0;
                          for (int a = 0; a < n; ++a)
                            for (int b = 0; b < n; ++b)
                              for (int w = 0; w < o; ++w) t[k++] = m.T(a, b, w);
                          append_array(out, "T", t, true);
                        },
                        [&](const DensePCFG& m) {
                          append_array(out, "start", m.start, false);
                          append_array(out, "binary", m.binary, false);
                          append_array(out, "emission", m.emission, true);
                        }},
             file.model);
  out += "  }\n}\n";
  return out;
}

void save_model(const ModelFile& file, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  os << serialize_model(file);
  if (!os) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

ModelFile parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(fmt::format("model JSON parse error: {}", e.what()));
  }
  if (!doc.is_object()) throw ModelFormatError("model document must be a JSON object");
  if (doc.value("format_version", 0) != kModelFormatVersion)
    throw ModelFormatError(fmt::format("unsupported format_version (expected {})", kModelFormatVersion));
  const std::string kind = doc.value("kind", "");
  if (!doc.contains("dims") || !doc.contains("vocab") || !doc.contains("params"))
    throw ModelFormatError("model document needs dims, vocab and params");
  const json& dims = doc.at("dims");
  const json& params = doc.at("params");

  ModelFile file;
  try {
    file.vocab = Vocab(doc.at("vocab").get<std::vector<std::string>>());
  } catch (const std::exception& e) {
    throw ModelFormatError(fmt::format("bad vocab: {}", e.what()));
  }
  const int o = read_dim(dims, "o");
  if (o != file.vocab.size()) throw ModelFormatError("dims.o differs from vocab size");

  std::vector<std::string> violations;
  if (kind == "cpd_hmm") {
    const int m = read_dim(dims, "m"), r = read_dim(dims, "r");
    CpdHMM model;
    model.start = read_array(params, "start", 1, m).row(0).transpose();
    model.U = read_array(params, "U", m, r);
    model.V = read_array(params, "V", r, m);
    model.W = read_array(params, "W", r, o);
    violations = validate(model, kLoadValidityTol);
    file.model = std::move(model);
  } else if (kind == "cpd_pcfg") {
    CpdPCFG model;
    model.num_nt = read_dim(dims, "num_nt");
    model.num_pt = read_dim(dims, "num_pt");
    const int r = read_dim(dims, "r"), m = model.num_symbols();
    model.start = read_array(params, "start", 1, model.num_nt).row(0).transpose();
    model.U = read_array(params, "U", model.num_nt, r);
    model.V = read_array(params, "V", r, m);
    model.W = read_array(params, "W", r, m);
    model.E = read_array(params, "E", model.num_pt, o);
    violations = validate(model, kLoadValidityTol);
    file.model = std::move(model);
  } else if (kind == "dense_hmm") {
    const int m = read_dim(dims, "m");
    DenseJointHMM model;
    model.start = read_array(params, "start", 1, m).row(0).transpose();
    const Matrix t = read_array(params, "T", 1, static_cast<Eigen::Index>(m) * m * o);
    model.by_word.assign(static_cast<std::size_t>(o), LogMat(m, m));
    Eigen::Index k = 0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int w = 0; w < o; ++w) model.by_word[static_cast<std::size_t>(w)](a, b) = t(0, k++);
    violations = validate(model, kLoadValidityTol);
    file.model = std::move(model);
  } else if (kind == "dense_pcfg") {
    DensePCFG model;
    model.num_nt = read_dim(dims, "num_nt");
    model.num_pt = read_dim(dims, "num_pt");
    const int m = model.num_symbols();
    model.start = read_array(params, "start", 1, model.num_nt).row(0).transpose();
    model.binary = read_array(params, "binary", model.num_nt, static_cast<Eigen::Index>(m) * m);
    model.emission = read_array(params, "emission", model.num_pt, o);
    violations = validate(model, kLoadValidityTol);
    file.model = std::move(model);
  } else {
    throw ModelFormatError(fmt::format("unknown model kind '{}'", kind));
  }
  if (!violations.empty()) {
    std::string msg = "model failed validation:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ModelFormatError(msg);
  }
  return file;
}

ModelFile load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ModelFormatError(fmt::format("cannot open model file '{}'", path));
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_model(ss.str());
}

}  // namespace rankspace
