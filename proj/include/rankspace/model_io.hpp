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


#ifndef RANKSPACE_MODEL_IO_HPP
#define RANKSPACE_MODEL_IO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>

#include "rankspace/grammar.hpp"

namespace rankspace {

using AnyModel = std::variant<CpdHMM, CpdPCFG, DenseJointHMM, DensePCFG>;

struct ModelFile {
  Vocab vocab;
  AnyModel model;
};

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kModelFormatVersion = 1;
inline constexpr double kLoadValidityTol = 1e-6;

// "cpd_hmm" | "cpd_pcfg" | "dense_hmm" | "dense_pcfg"
std::string model_kind(const AnyModel& model);

// JSON document; parameter arrays are row-major with %.17g entries and null
// for log(0).
std::string serialize_model(const ModelFile& file);
void save_model(const ModelFile& file, const std::string& path);

// Throws ModelFormatError on malformed input or when validation (at
// kLoadValidityTol) fails.
ModelFile parse_model(const std::string& text);
ModelFile load_model(const std::string& path);

}  // namespace rankspace

#endif  // RANKSPACE_MODEL_IO_HPP
