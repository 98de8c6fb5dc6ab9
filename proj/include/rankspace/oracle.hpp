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


#ifndef RANKSPACE_ORACLE_HPP
#define RANKSPACE_ORACLE_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rankspace/grammar.hpp"
#include "rankspace/pcfg_infer.hpp"

namespace rankspace {

// Brute-force references. Everything here accumulates in the real domain
// with compensated summation and shares no code with the DP kernels.

struct EnumerationBudget {
  std::uint64_t max_states_hmm = 1'000'000;  // m^n
  std::uint64_t max_trees = 5'000'000;       // Catalan(n-1) * num_nt^(n-1) * num_pt^n
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

// log of the sum over every state sequence a_1..a_n.
double hmm_bruteforce_logZ(const DenseJointHMM& model, TokenSeq seq, const EnumerationBudget& budget = {});

struct PcfgOracleResult {
  double logZ = 0;
  SpanTable<double> marginals;  // width >= 2
  ParseTree mbr_tree;
  double mbr_objective = 0;
};

// Enumerates every bracketing and every symbol labeling.
PcfgOracleResult pcfg_bruteforce(const DensePCFG& model, TokenSeq seq, const EnumerationBudget& budget = {});

// All binary bracketings over n leaves (Catalan(n-1) of them).
std::vector<ParseTree> enumerate_trees(int n);

struct MbrOracleResult {
  ParseTree tree;  // first maximizer in enumeration order
  double objective = 0;
};
MbrOracleResult mbr_bruteforce(const SpanMarginals& marginals);

}  // namespace rankspace

#endif  // RANKSPACE_ORACLE_HPP
