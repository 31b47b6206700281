// Copyright 2026-present the vcdkit authors
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

#pragma once

// Dense helpers shared by search, normalization and localization. Everything
// here is templated on the Eigen expression type so callers can pass rows,
// blocks or maps without copying.

#include <cstddef>

#include <Eigen/Dense>

namespace vcd {

/// Inner product accumulated left to right in double precision.
///
/// This is the canonical frame similarity used by the search: the summation
/// order is fixed, so the same pair of rows always yields the same bits.
template <typename A, typename B>
double inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  eigen_assert(a.size() == b.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a.derived().coeff(i)) * static_cast<double>(b.derived().coeff(i));
  }
  return acc;
}

/// Scales every row to unit L2 norm in place. Zero rows stay zero; their count is returned.
template <typename Derived>
std::size_t normalize_rows(Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  std::size_t zero_rows = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double norm = m.row(r).template cast<double>().norm();
    if (norm == 0.0) {
      ++zero_rows;
      continue;
    }
    m.row(r) = (m.row(r).template cast<double>() / norm).template cast<Scalar>();
  }
  return zero_rows;
}

/// Population variance of each column, computed in two passes.
template <typename Derived>
Eigen::VectorXd column_variance(const Eigen::MatrixBase<Derived>& m) {
  const Eigen::MatrixXd x = m.template cast<double>();
  if (x.rows() == 0) return Eigen::VectorXd::Zero(x.cols());
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows())).transpose();
}

/// All pairwise inner products `a * b^T` in double precision.
template <typename A, typename B>
Eigen::MatrixXd similarity_block(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.template cast<double>() * b.template cast<double>().transpose();
}

}  // namespace vcd
