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

#include "sympopt/core.hpp"

namespace sympopt {

/// Default tolerance for the purity residual ||(gamma sigma)^2 + I||_F.
inline constexpr double kPurityTol = 1e-8;

// ---------------------------------------------------------------------------
// Symplectic spectrum (reference diagonalization)
// ---------------------------------------------------------------------------

/// Symplectic eigenvalues of a positive definite quadratic form, ascending.
struct SymplecticSpectrum {
  Eigen::VectorXd eps;

  double e0() const { return 0.5 * eps.sum(); }
  double gap() const { return eps(0); }
};

struct SpectrumOptions {
  /// Relative mismatch allowed inside each doubled eigenvalue pair of
  /// sigma H sigma^T H before the result is considered unreliable.
  double pair_rel_tol = 1e-8;
  /// Verify the input is SPD first (one symmetric eigensolve).
  bool validate_spd = true;
};

/// Reference route: the positive eigenvalue pairs of sigma H sigma^T H.
/// Genuinely independent of the optimization machinery; used as the oracle
/// everywhere a ground-truth energy, gap or spectrum is needed.
SymplecticSpectrum symplectic_spectrum(const Eigen::MatrixXd& h,
                                       const SpectrumOptions& opts = {});

/// Fast route for H = V (+) I: the symplectic eigenvalues are the square
/// roots of the ordinary eigenvalues of the position block V.
SymplecticSpectrum symplectic_spectrum_from_position_block(
    const Eigen::MatrixXd& v);

// ---------------------------------------------------------------------------
// Covariance matrices
// ---------------------------------------------------------------------------

struct CovarianceMatrix {
  Index d = 0;
  Eigen::MatrixXd gamma;  // 2d x 2d, symmetric positive definite

  /// Validates symmetry, positive definiteness and the uncertainty bound
  /// (all symplectic eigenvalues >= 1 - tol).
  static CovarianceMatrix checked(Eigen::MatrixXd g, double tol = kPurityTol);

  /// Wraps without the O(n^3) physicality validation; for matrices that are
  /// positive definite and symmetric by construction.
  static CovarianceMatrix trusted(Eigen::MatrixXd g);
};

/// Purity via the idempotency residual ||(gamma sigma)^2 + I||_F <= tol.
/// Returns false (rather than throwing) when gamma is not SPD.
bool is_pure_cm(const Eigen::MatrixXd& gamma, double tol = kPurityTol);
bool is_pure_cm(const CovarianceMatrix& cm, double tol = kPurityTol);

/// log det of an SPD matrix via Cholesky.  Throws NumericalFailure if the
/// factorization fails.
double log_det_spd(const Eigen::MatrixXd& m);

// ---------------------------------------------------------------------------
// Pure-state factorization
//
// Every pure covariance matrix is determined by an SPD matrix X and a
// symmetric matrix Y through
//     gamma = [[X, XY], [YX, YXY + X^{-1}]],
// and conversely X = gamma_xx, Y = X^{-1} gamma_xp.
// ---------------------------------------------------------------------------

/// Assembles the pure covariance matrix determined by (X, Y).
/// X must be SPD and Y symmetric.
CovarianceMatrix pure_cm_from_xy(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y);

/// Recovers (X, Y) from a pure covariance matrix.  Throws InvalidInput if
/// the purity residual exceeds tol.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> spd_symplectic_factor(
    const CovarianceMatrix& cm, double tol = kPurityTol);

// ---------------------------------------------------------------------------
// Closed-form ground state for H = V (+) I
// ---------------------------------------------------------------------------

struct SpdRoots {
  Eigen::MatrixXd sqrt;      // V^{1/2}
  Eigen::MatrixXd inv_sqrt;  // V^{-1/2}
};

/// Symmetric square root and inverse square root of an SPD matrix.
SpdRoots spd_roots(const Eigen::MatrixXd& v);

/// Ground-state covariance matrix of H = V (+) I:
/// gamma = V^{-1/2} (+) V^{1/2}.
CovarianceMatrix block_diagonal_ground_cm(const Eigen::MatrixXd& v);

}  // namespace sympopt
