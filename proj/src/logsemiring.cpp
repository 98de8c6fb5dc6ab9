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

#include "rankspace/logsemiring.hpp"

#include <algorithm>
#include <stdexcept>

namespace rankspace {

Real log_sum_exp(std::span<const Real> xs) {
  if (xs.empty()) throw std::invalid_argument("empty reduction");
  const Real mx = *std::max_element(xs.begin(), xs.end());
  if (mx == kNegInf) return kNegInf;
  if (mx == std::numeric_limits<Real>::infinity()) return mx;
  Real sum = 0;
  for (Real x : xs) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

Real log_sum_exp(const Vector& xs) {
  return log_sum_exp(std::span<const Real>(xs.data(), static_cast<std::size_t>(xs.size())));
}

LogVec log_mat_vec(const LogMat& m, const LogVec& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("log_mat_vec: dimension mismatch");
  return ExpMatrix(m).apply(ScaledVec::from_log(v)).to_log();
}

LogVec log_hadamard(const LogVec& a, const LogVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("log_hadamard: length mismatch");
  // -inf + finite stays -inf; both operands are never +inf.
  return a + b;
}

ScaledVec ScaledVec::from_log(const LogVec& v) {
  ScaledVec out;
  out.value.resize(v.size());
  const Real mx = v.size() ? v.maxCoeff() : kNegInf;
  if (mx == kNegInf) {
    out.value.setZero();
    return out;
  }
  out.log_scale = mx;
  for (Eigen::Index i = 0; i < v.size(); ++i) out.value[i] = std::exp(v[i] - mx);
  return out;
}

ScaledVec ScaledVec::from_real(Vector v, Real log_factor) {
  ScaledVec out;
  const Real mx = v.size() ? v.maxCoeff() : Real(0);
  if (!(mx > 0) || log_factor == kNegInf) {
    out.value = Vector::Zero(v.size());
    return out;
  }
  out.value = std::move(v) / mx;
  out.log_scale = log_factor + std::log(mx);
  return out;
}

LogVec ScaledVec::to_log() const {
  LogVec out(value.size());
  for (Eigen::Index i = 0; i < value.size(); ++i)
    out[i] = value[i] > 0 ? log_scale + std::log(value[i]) : kNegInf;
  return out;
}

ExpMatrix::ExpMatrix(const LogMat& m) : row_log_scale_(m.rows()), value_(m.rows(), m.cols()) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Real mx = m.cols() ? m.row(i).maxCoeff() : kNegInf;
    if (mx == kNegInf) {
      row_log_scale_[i] = 0;
      value_.row(i).setZero();
      continue;
    }
    row_log_scale_[i] = mx;
    for (Eigen::Index j = 0; j < m.cols(); ++j) value_(i, j) = std::exp(m(i, j) - mx);
  }
  // Row scales within a safe range are pre-exponentiated relative to the top
  // one, so the products below need no per-call log/exp.
  if (m.rows() > 0) {
    top_scale_ = row_log_scale_.maxCoeff();
    if (top_scale_ - row_log_scale_.minCoeff() <= kFactorRange)
      row_factor_ = (row_log_scale_.array() - top_scale_).exp().matrix();
  }
}

ScaledVec ExpMatrix::apply(const ScaledVec& v) const {
  if (v.size() != cols()) throw std::invalid_argument("ExpMatrix::apply: dimension mismatch");
  if (v.log_scale == kNegInf) return ScaledVec{kNegInf, Vector::Zero(rows())};
  Vector prod = value_ * v.value;
  if (row_factor_.size()) return ScaledVec::from_real(prod.cwiseProduct(row_factor_), v.log_scale + top_scale_);
  // Fold the per-row scales back in; rows differ, so renormalize relative to
  // the largest folded scale.
  Real top = kNegInf;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (prod[i] > 0) top = std::max(top, row_log_scale_[i] + std::log(prod[i]));
  if (top == kNegInf) return ScaledVec{kNegInf, Vector::Zero(rows())};
  ScaledVec out;
  out.log_scale = v.log_scale + top;
  out.value.resize(rows());
  for (Eigen::Index i = 0; i < rows(); ++i)
    out.value[i] = prod[i] > 0 ? std::exp(row_log_scale_[i] + std::log(prod[i]) - top) : Real(0);
  return out;
}

ScaledVec ExpMatrix::apply_transpose(const ScaledVec& v) const {
  if (v.size() != rows()) throw std::invalid_argument("ExpMatrix::apply_transpose: dimension mismatch");
  if (v.log_scale == kNegInf) return ScaledVec{kNegInf, Vector::Zero(cols())};
  if (row_factor_.size()) return ScaledVec::from_real(value_.transpose() * v.value.cwiseProduct(row_factor_), v.log_scale + top_scale_);
  // Absorb row scales into the operand, then one shift for the whole vector.
  Real top = kNegInf;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (v.value[i] > 0) top = std::max(top, row_log_scale_[i] + std::log(v.value[i]));
  if (top == kNegInf) return ScaledVec{kNegInf, Vector::Zero(cols())};
  Vector shifted(rows());
  for (Eigen::Index i = 0; i < rows(); ++i)
    shifted[i] = v.value[i] > 0 ? std::exp(row_log_scale_[i] + std::log(v.value[i]) - top) : Real(0);
  return ScaledVec::from_real(value_.transpose() * shifted, v.log_scale + top);
}

bool is_log_valid(std::span<const Real> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](Real x) { return !std::isnan(x) && x != std::numeric_limits<Real>::infinity(); });
}

}  // namespace rankspace
