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


#ifndef RANKSPACE_ORACLE_CHECK_HPP
#define RANKSPACE_ORACLE_CHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rankspace/trainer.hpp"

namespace rankspace {

inline constexpr double kOracleLogZTol = 1e-9;
inline constexpr double kOracleMarginalTol = 1e-9;
inline constexpr double kOracleMbrTol = 1e-12;

struct OracleCaseResult {
  int index = 0;
  std::string dims;
  double max_logz_diff = 0;      // over every pair of variants and the oracle
  double max_marginal_diff = 0;  // PCFG only
  double mbr_gap = 0;            // oracle objective minus decoded objective
  bool passed = true;
  std::string message;
};

struct OracleCheckReport {
  std::string kind;
  std::vector<OracleCaseResult> cases;

  bool passed() const;
  std::string to_text() const;
};

// Random small models and sentences checked against exhaustive enumeration.
// With corrupt set, each model is perturbed so validation fails, and that is
// reported as a mismatch.
OracleCheckReport oracle_check(ModelKind kind, int cases, std::uint64_t seed, bool corrupt = false);

}  // namespace rankspace

#endif  // RANKSPACE_ORACLE_CHECK_HPP
