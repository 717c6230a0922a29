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

#include "sympopt/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace sympopt {

namespace {

void require_square_even(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 2 || m.rows() % 2 != 0)
    throw InvalidInput(std::string(who) + ": matrix must be square with even dimension");
}

void require_symmetric(const Eigen::MatrixXd& m, const char* who) {
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > 1e-12 * scale)
    throw InvalidInput(std::string(who) + ": matrix must be symmetric");
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("symmetric eigensolver failed to converge");
  return es.eigenvalues().minCoeff();
}

}  // namespace

SymplecticSpectrum symplectic_spectrum(const Eigen::MatrixXd& h,
                                       const SpectrumOptions& opts) {
  require_square_even(h, "symplectic_spectrum");
  require_symmetric(h, "symplectic_spectrum");
  if (opts.validate_spd) {
    const double lmin = min_symmetric_eigenvalue(h);
    if (lmin <= 0.0)
      throw NumericalFailure(
          "symplectic_spectrum: input is not positive definite (min "
          "eigenvalue " +
          std::to_string(lmin) + ")");
  }

  const Index d = h.rows() / 2;
  const Eigen::MatrixXd m = sigma_conjugate(h) * h;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("symplectic_spectrum: eigensolver failed");

  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<double> roots;
  roots.reserve(2 * d);
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) > 1e-8 * scale)
      throw NumericalFailure(
          "symplectic_spectrum: complex eigenvalue encountered; input is "
          "likely not positive definite");
    const double re = ev(i).real();
    if (re <= 0.0)
      throw NumericalFailure(
          "symplectic_spectrum: nonpositive eigenvalue of sigma H sigma^T H");
    roots.push_back(std::sqrt(re));
  }
  std::sort(roots.begin(), roots.end());

  SymplecticSpectrum out;
  out.eps.resize(d);
  for (Index i = 0; i < d; ++i) {
    const double a = roots[2 * i];
    const double b = roots[2 * i + 1];
    if (b - a > opts.pair_rel_tol * b)
      throw NumericalFailure(
          "symplectic_spectrum: eigenvalue pairing broke down (" +
          std::to_string(a) + " vs " + std::to_string(b) +
          "); result unreliable");
    out.eps(i) = a;
  }
  return out;
}

SymplecticSpectrum symplectic_spectrum_from_position_block(
    const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() < 1)
    throw InvalidInput(
        "symplectic_spectrum_from_position_block: matrix must be square");
  require_symmetric(v, "symplectic_spectrum_from_position_block");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("symmetric eigensolver failed to converge");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalFailure(
        "symplectic_spectrum_from_position_block: position block is not "
        "positive definite");
  SymplecticSpectrum out;
  out.eps = es.eigenvalues().cwiseSqrt();  // already ascending
  return out;
}

CovarianceMatrix CovarianceMatrix::checked(Eigen::MatrixXd g, double tol) {
  require_square_even(g, "CovarianceMatrix");
  require_symmetric(g, "CovarianceMatrix");
  g = 0.5 * (g + g.transpose()).eval();
  const auto spec = symplectic_spectrum(g);
  if (spec.eps.minCoeff() < 1.0 - tol)
    throw InvalidInput(
        "CovarianceMatrix: uncertainty relation violated (min symplectic "
        "eigenvalue " +
        std::to_string(spec.eps.minCoeff()) + ")");
  return {g.rows() / 2, std::move(g)};
}

CovarianceMatrix CovarianceMatrix::trusted(Eigen::MatrixXd g) {
  require_square_even(g, "CovarianceMatrix");
  return {g.rows() / 2, std::move(g)};
}

bool is_pure_cm(const Eigen::MatrixXd& gamma, double tol) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0 ||
      gamma.rows() < 2)
    return false;
  if ((gamma - gamma.transpose()).norm() >
      1e-10 * std::max(1.0, gamma.norm()))
    return false;
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::MatrixXd gs = times_sigma(gamma);
  Eigen::MatrixXd r = gs * gs;
  r.diagonal().array() += 1.0;
  return r.norm() <= tol;
}

bool is_pure_cm(const CovarianceMatrix& cm, double tol) {
  return is_pure_cm(cm.gamma, tol);
}

double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("log_det_spd: matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

CovarianceMatrix pure_cm_from_xy(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y) {
  const Index d = x.rows();
  if (x.cols() != d || y.rows() != d || y.cols() != d)
    throw InvalidInput("pure_cm_from_xy: X and Y must be square and matching");
  require_symmetric(y, "pure_cm_from_xy (Y)");
  require_symmetric(x, "pure_cm_from_xy (X)");
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("pure_cm_from_xy: X must be positive definite");

  const Eigen::MatrixXd xy = x * y;
  const Eigen::MatrixXd xinv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd g(2 * d, 2 * d);
  g.topLeftCorner(d, d) = x;
  g.topRightCorner(d, d) = xy;
  g.bottomLeftCorner(d, d) = xy.transpose();
  g.bottomRightCorner(d, d) = y * xy + xinv;
  g = 0.5 * (g + g.transpose()).eval();
  return CovarianceMatrix::trusted(std::move(g));
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> spd_symplectic_factor(
    const CovarianceMatrix& cm, double tol) {
  if (!is_pure_cm(cm, tol))
    throw InvalidInput(
        "spd_symplectic_factor: covariance matrix is not pure within "
        "tolerance");
  const Index d = cm.d;
  const Eigen::MatrixXd x = cm.gamma.topLeftCorner(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("spd_symplectic_factor: position block not SPD");
  Eigen::MatrixXd y = llt.solve(cm.gamma.topRightCorner(d, d));
  y = 0.5 * (y + y.transpose()).eval();
  return {x, y};
}

SpdRoots spd_roots(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() < 1)
    throw InvalidInput("spd_roots: matrix must be square");
  require_symmetric(v, "spd_roots");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("spd_roots: eigensolver failed to converge");
  if (es.eigenvalues().minCoeff() < 1e-14)
    throw NumericalFailure("spd_roots: matrix is not positive definite");
  const Eigen::VectorXd s = es.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd& u = es.eigenvectors();
  SpdRoots out;
  out.sqrt = u * s.asDiagonal() * u.transpose();
  out.inv_sqrt = u * s.cwiseInverse().asDiagonal() * u.transpose();
  out.sqrt = 0.5 * (out.sqrt + out.sqrt.transpose()).eval();
  out.inv_sqrt = 0.5 * (out.inv_sqrt + out.inv_sqrt.transpose()).eval();
  return out;
}

CovarianceMatrix block_diagonal_ground_cm(const Eigen::MatrixXd& v) {
  const SpdRoots roots = spd_roots(v);
  const Index d = v.rows();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  g.topLeftCorner(d, d) = roots.inv_sqrt;
  g.bottomRightCorner(d, d) = roots.sqrt;
  return CovarianceMatrix::trusted(std::move(g));
}

}  // namespace sympopt
