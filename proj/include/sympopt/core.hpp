// Copyright 2026 The sympopt authors
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

#include <Eigen/Dense>

#include <utility>

#include "sympopt/errors.hpp"

namespace sympopt {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Default tolerance for structural checks (symplecticity, symmetry).
inline constexpr double kStructuralTol = 1e-10;

// ---------------------------------------------------------------------------
// Symplectic form
//
// All quadratures are ordered (x_1..x_d, p_1..p_d).  The canonical
// antisymmetric form on 2d modes is sigma = [[0, I], [-I, 0]].  Products
// with sigma are block row/column swaps, so the dense matrix is only
// materialized on request.
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct SymplecticForm {
  Index d = 0;
  MatrixX<Scalar> sigma;  // 2d x 2d dense copy
};

template <typename Scalar = double>
SymplecticForm<Scalar> build_sigma(Index d) {
  if (d < 1) throw InvalidInput("build_sigma: d must be >= 1");
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(2 * d, 2 * d);
  s.topRightCorner(d, d).setIdentity();
  s.bottomLeftCorner(d, d) = -MatrixX<Scalar>::Identity(d, d);
  return {d, std::move(s)};
}

/// sigma * X for a matrix with 2d rows, applied as a block swap.
template <typename Derived>
MatrixX<typename Derived::Scalar> sigma_times(
    const Eigen::MatrixBase<Derived>& x) {
  const Index n = x.rows();
  if (n < 2 || n % 2 != 0)
    throw InvalidInput("sigma_times: row count must be even and positive");
  const Index d = n / 2;
  MatrixX<typename Derived::Scalar> y(n, x.cols());
  y.topRows(d) = x.bottomRows(d);
  y.bottomRows(d) = -x.topRows(d);
  return y;
}

/// X * sigma for a matrix with 2d columns.
template <typename Derived>
MatrixX<typename Derived::Scalar> times_sigma(
    const Eigen::MatrixBase<Derived>& x) {
  const Index n = x.cols();
  if (n < 2 || n % 2 != 0)
    throw InvalidInput("times_sigma: column count must be even and positive");
  const Index d = n / 2;
  MatrixX<typename Derived::Scalar> y(x.rows(), n);
  y.leftCols(d) = -x.rightCols(d);
  y.rightCols(d) = x.leftCols(d);
  return y;
}

/// sigma * H * sigma^T, a pure block rearrangement: the (x,x) and (p,p)
/// quadrants swap and the mixed quadrants flip sign.
template <typename Derived>
MatrixX<typename Derived::Scalar> sigma_conjugate(
    const Eigen::MatrixBase<Derived>& h) {
  const Index n = h.rows();
  if (n != h.cols() || n < 2 || n % 2 != 0)
    throw InvalidInput("sigma_conjugate: matrix must be square and even");
  const Index d = n / 2;
  MatrixX<typename Derived::Scalar> y(n, n);
  y.topLeftCorner(d, d) = h.bottomRightCorner(d, d);
  y.topRightCorner(d, d) = -h.bottomLeftCorner(d, d);
  y.bottomLeftCorner(d, d) = -h.topRightCorner(d, d);
  y.bottomRightCorner(d, d) = h.topLeftCorner(d, d);
  return y;
}

// ---------------------------------------------------------------------------
// Basis projectors
// ---------------------------------------------------------------------------

/// Pi1 = [I; 0] and Pi2 = [0; I] (both 2d x d) select the position and
/// momentum halves of the quadrature basis.  They exist as an index
/// convention; dense copies are for tests and interop only.
template <typename Scalar = double>
struct BasisProjectors {
  Index d = 0;

  MatrixX<Scalar> pi1() const {
    MatrixX<Scalar> p = MatrixX<Scalar>::Zero(2 * d, d);
    p.topRows(d).setIdentity();
    return p;
  }

  MatrixX<Scalar> pi2() const {
    MatrixX<Scalar> p = MatrixX<Scalar>::Zero(2 * d, d);
    p.bottomRows(d).setIdentity();
    return p;
  }
};

template <typename Scalar = double>
BasisProjectors<Scalar> build_projectors(Index d) {
  if (d < 1) throw InvalidInput("build_projectors: d must be >= 1");
  return {d};
}

// ---------------------------------------------------------------------------
// Subspace projector
// ---------------------------------------------------------------------------

/// P_k keeps the first k position rows and the first k momentum rows of a
/// 2d-row quadrature matrix.  Applied as a row selection, never as a dense
/// product.
template <typename Scalar = double>
struct SubspaceProjector {
  Index d = 0;
  Index k = 0;

  MatrixX<Scalar> dense() const {
    MatrixX<Scalar> p = MatrixX<Scalar>::Zero(2 * k, 2 * d);
    for (Index i = 0; i < k; ++i) {
      p(i, i) = Scalar(1);
      p(k + i, d + i) = Scalar(1);
    }
    return p;
  }

  /// Rows {0..k-1, d..d+k-1} of x, in that order.
  template <typename Derived>
  MatrixX<typename Derived::Scalar> select_rows(
      const Eigen::MatrixBase<Derived>& x) const {
    if (x.rows() != 2 * d)
      throw InvalidInput("SubspaceProjector: operand must have 2d rows");
    MatrixX<typename Derived::Scalar> y(2 * k, x.cols());
    y.topRows(k) = x.topRows(k);
    y.bottomRows(k) = x.middleRows(d, k);
    return y;
  }
};

template <typename Scalar = double>
SubspaceProjector<Scalar> build_pk(Index d, Index k) {
  if (d < 1) throw InvalidInput("build_pk: d must be >= 1");
  if (k < 1 || k > d) throw InvalidInput("build_pk: k must lie in [1, d]");
  return {d, k};
}

// ---------------------------------------------------------------------------
// Packed symmetric parameterization
//
// A symmetric d x d matrix is driven by t = d(d+1)/2 unconstrained
// coefficients: the upper triangle of a working matrix X stored row-major.
// The materialized matrix is M = triu(X) + triu(X)^T, so off-diagonal
// coefficients land in two slots and diagonal ones are doubled.  The
// pullback of any gradient dF/dM to the coefficients is therefore
// slot(i,j) = G_ij + G_ji for i < j and slot(i,i) = 2 G_ii.
// ---------------------------------------------------------------------------

inline Index packed_size(Index d) { return d * (d + 1) / 2; }

/// Flat slot of entry (i, j) with i <= j, row-major over the upper triangle.
inline Index packed_index(Index d, Index i, Index j) {
  return i * d - i * (i - 1) / 2 + (j - i);
}

template <typename Scalar = double>
struct SymmetricParam {
  Index d = 0;
  VectorX<Scalar> coeffs;  // size d(d+1)/2
};

template <typename Derived>
MatrixX<typename Derived::Scalar> materialize_symmetric(
    const Eigen::MatrixBase<Derived>& coeffs, Index d) {
  using Scalar = typename Derived::Scalar;
  if (coeffs.size() != packed_size(d))
    throw InvalidInput("materialize_symmetric: coefficient count mismatch");
  MatrixX<Scalar> m(d, d);
  Index slot = 0;
  for (Index i = 0; i < d; ++i) {
    m(i, i) = Scalar(2) * coeffs(slot++);
    for (Index j = i + 1; j < d; ++j) {
      const Scalar v = coeffs(slot++);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

template <typename Scalar>
MatrixX<Scalar> materialize_symmetric(const SymmetricParam<Scalar>& p) {
  return materialize_symmetric(p.coeffs, p.d);
}

/// Inverse of materialize_symmetric; exact for exactly symmetric input.
template <typename Derived>
SymmetricParam<typename Derived::Scalar> pack_symmetric(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Index d = m.rows();
  if (m.cols() != d) throw InvalidInput("pack_symmetric: matrix must be square");
  SymmetricParam<Scalar> p{d, VectorX<Scalar>(packed_size(d))};
  Index slot = 0;
  for (Index i = 0; i < d; ++i) {
    p.coeffs(slot++) = m(i, i) / Scalar(2);
    for (Index j = i + 1; j < d; ++j) p.coeffs(slot++) = m(i, j);
  }
  return p;
}

/// Pullback of an unconstrained d x d gradient to the packed coefficients.
template <typename Derived>
VectorX<typename Derived::Scalar> chain_gradient_to_params(
    const Eigen::MatrixBase<Derived>& g) {
  using Scalar = typename Derived::Scalar;
  const Index d = g.rows();
  if (g.cols() != d)
    throw InvalidInput("chain_gradient_to_params: matrix must be square");
  VectorX<Scalar> out(packed_size(d));
  Index slot = 0;
  for (Index i = 0; i < d; ++i) {
    out(slot++) = Scalar(2) * g(i, i);
    for (Index j = i + 1; j < d; ++j) out(slot++) = g(i, j) + g(j, i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Symplecticity test
// ---------------------------------------------------------------------------

/// True iff S sigma_{2d} S^T = sigma_{2k} within tol (Frobenius), for a
/// 2k x 2d matrix S.  Square matrices are the k = d case.
template <typename Derived>
bool is_symplectic(const Eigen::MatrixBase<Derived>& s,
                   double tol = kStructuralTol) {
  const Index rows = s.rows();
  const Index cols = s.cols();
  if (rows < 2 || rows % 2 != 0 || cols < 2 || cols % 2 != 0)
    throw InvalidInput("is_symplectic: dimensions must be even and positive");
  if (rows > cols)
    throw InvalidInput("is_symplectic: matrix cannot have more rows than columns");
  const Index k = rows / 2;
  MatrixX<typename Derived::Scalar> r =
      s * sigma_times(s.transpose().eval());
  r.topRightCorner(k, k).diagonal().array() -= 1;
  r.bottomLeftCorner(k, k).diagonal().array() += 1;
  return r.norm() <= tol;
}

}  // namespace sympopt
