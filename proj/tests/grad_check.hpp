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


#ifndef RANKSPACE_TESTS_GRAD_CHECK_HPP
#define RANKSPACE_TESTS_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "rankspace/trainer.hpp"

namespace rankspace::testing {

struct DirectionalCheck {
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
};

// Compares <grad, d> with a central difference along a random unit direction d.
inline DirectionalCheck directional_check(const ScoreParams& params, const std::vector<TokenSeq>& batch,
                                          std::uint64_t seed, double h = 1e-4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Vector theta = params.flatten();
  Vector d(theta.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = static_cast<Real>(normal(rng));
  d.normalize();

  const LossGrad lg = loss_and_grad(params, batch);
  auto loss_at = [&](double step) {
    ScoreParams p = params;
    p.assign(theta + static_cast<Real>(step) * d);
    return loss_and_grad(p, batch).nll;
  };
  DirectionalCheck out;
  out.analytic = lg.grad.flatten().dot(d);
  out.numeric = (loss_at(h) - loss_at(-h)) / (2 * h);
  const double denom = std::max({std::abs(out.analytic), std::abs(out.numeric), 1e-8});
  out.rel_error = std::abs(out.analytic - out.numeric) / denom;
  return out;
}

}  // namespace rankspace::testing

#endif  // RANKSPACE_TESTS_GRAD_CHECK_HPP
