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

#ifndef RANKSPACE_LOGSEMIRING_HPP
#define RANKSPACE_LOGSEMIRING_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include <Eigen/Dense>

namespace rankspace {

#ifdef RANKSPACE_SINGLE_PRECISION
using Real = float;
#else
using Real = double;
#endif

inline constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();

using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Natural-log probabilities. Entries are finite or -inf, never NaN.
using LogVec = Vector;
using LogMat = Matrix;

// log(exp(a) + exp(b)) without overflow; -inf is the identity.
inline Real log_add(Real a, Real b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// Max-shifted log(sum(exp(xs))). Throws std::invalid_argument("empty reduction")
// on empty input.
Real log_sum_exp(std::span<const Real> xs);
Real log_sum_exp(const Vector& xs);

// out_i = log sum_j exp(M_ij + v_j), via the log-einsum-exp trick.
LogVec log_mat_vec(const LogMat& m, const LogVec& v);

// out_i = a_i + b_i.
LogVec log_hadamard(const LogVec& a, const LogVec& b);

// A vector stored as exp(log_scale) * value, with max(value) == 1 unless the
// vector is entirely zero (then log_scale == -inf and value is all zeros).
struct ScaledVec {
  Real log_scale = kNegInf;
  Vector value;

  static ScaledVec from_log(const LogVec& v);
  // Normalizes an arbitrary nonnegative real vector carrying an extra log factor.
  static ScaledVec from_real(Vector v, Real log_factor);
  LogVec to_log() const;
  Eigen::Index size() const { return value.size(); }
};

// Row-shifted exponentiated log-matrix: M_ij = row_log_scale_i + log(value_ij).
// Built once per compiled model so that the kernels only do real-domain
// products.
class ExpMatrix {
 public:
  ExpMatrix() = default;
  explicit ExpMatrix(const LogMat& m);

  Eigen::Index rows() const { return value_.rows(); }
  Eigen::Index cols() const { return value_.cols(); }
  const Matrix& value() const { return value_; }
  const Vector& row_log_scale() const { return row_log_scale_; }

  // log(exp(M) exp(v)) for log-vector v.
  ScaledVec apply(const ScaledVec& v) const;
  // log(exp(M)^T exp(v)).
  ScaledVec apply_transpose(const ScaledVec& v) const;

 private:
  static constexpr Real kFactorRange = sizeof(Real) == sizeof(float) ? 40 : 200;

  Vector row_log_scale_;
  Matrix value_;
  Real top_scale_ = 0;
  Vector row_factor_;  // empty when the row scales span more than kFactorRange
};

// true iff every entry is finite or -inf (no NaN, no +inf).
bool is_log_valid(std::span<const Real> xs);
inline bool is_log_valid(const Vector& v) { return is_log_valid(std::span<const Real>(v.data(), static_cast<std::size_t>(v.size()))); }
inline bool is_log_valid(const Matrix& m) { return is_log_valid(std::span<const Real>(m.data(), static_cast<std::size_t>(m.size()))); }

}  // namespace rankspace

#endif  // RANKSPACE_LOGSEMIRING_HPP
