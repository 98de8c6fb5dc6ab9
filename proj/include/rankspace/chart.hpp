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


#ifndef RANKSPACE_CHART_HPP
#define RANKSPACE_CHART_HPP

#include <cassert>
#include <cstddef>
#include <vector>

#include "rankspace/logsemiring.hpp"

namespace rankspace {

// Cells for every span [i, j) with 0 <= i < j <= n, laid out width by width so
// a sweep over one width touches contiguous memory.
template <class T>
class SpanTable {
 public:
  SpanTable() = default;
  explicit SpanTable(int n, const T& init = T()) : n_(n), cells_(static_cast<std::size_t>(n) * (n + 1) / 2, init) {}

  int length() const { return n_; }

  T& operator()(int i, int j) { return cells_[index(i, j)]; }
  const T& operator()(int i, int j) const { return cells_[index(i, j)]; }

 private:
  std::size_t index(int i, int j) const {
    assert(0 <= i && i < j && j <= n_);
    const std::size_t w = static_cast<std::size_t>(j - i);
    const std::size_t offset = (w - 1) * static_cast<std::size_t>(n_ + 1) - (w - 1) * w / 2;
    return offset + static_cast<std::size_t>(i);
  }

  int n_ = 0;
  std::vector<T> cells_;
};

// Streaming sum of scaled vectors (or Hadamard products of pairs) that keeps a
// single running shift.
class ScaledSum {
 public:
  explicit ScaledSum(Eigen::Index size) : acc_(Vector::Zero(size)) {}

  void add(const ScaledVec& x) { add_scaled(x.log_scale, x.value); }
  void add_product(const ScaledVec& a, const ScaledVec& b) {
    const Real s = a.log_scale + b.log_scale;
    if (s == kNegInf) return;
    rescale_to(s);
    acc_.noalias() += std::exp(s - top_) * a.value.cwiseProduct(b.value);
  }

  ScaledVec result() const { return ScaledVec::from_real(acc_, top_); }

 private:
  void add_scaled(Real s, const Vector& v) {
    if (s == kNegInf) return;
    rescale_to(s);
    acc_.noalias() += std::exp(s - top_) * v;
  }
  void rescale_to(Real s) {
    if (top_ == kNegInf) {
      top_ = s;
    } else if (s > top_) {
      acc_ *= std::exp(top_ - s);
      top_ = s;
    }
  }

  Vector acc_;
  Real top_ = kNegInf;
};

}  // namespace rankspace

#endif  // RANKSPACE_CHART_HPP
