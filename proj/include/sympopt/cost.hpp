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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sympopt/core.hpp"
#include "sympopt/hamiltonian.hpp"

namespace sympopt {

// ---------------------------------------------------------------------------
// Unit-triangular symplectic factorization
//
// L3 = U(M1) L(M2) U(M3) with U(M) = [[I, M], [0, I]], L(M) = [[I, 0],
// [M, I]] and M1, M2, M3 symmetric.  Multiplying out,
//
//   L3 = [[I + M1 M2, M3 + M1 M2 M3 + M1],
//         [M2,        M2 M3 + I        ]],
//
// which is symplectic for every choice of the three factors, so gamma =
// L3^T L3 ranges over (a dense subset of) the pure covariance matrices
// while the parameters stay globally unconstrained.
//
// Three parameterization modes share this shape:
//   energy  - M1, M2, M3 all symmetric; gamma = L3^T L3 is optimized over.
//   gap     - M1 = e1 m1^T for a free row vector m1 (not symmetric); only
//             the first symplectic-pair row block of L3 enters the cost.
//   partial - symmetric factors, cost restricted to the leading k pairs.
// ---------------------------------------------------------------------------

enum class FactorMode { energy, gap, partial };

struct TriangularFactors {
  FactorMode mode = FactorMode::energy;
  Index d = 0;
  Index k = 0;  // leading pair count: 1 for gap, in [1, d] for partial, d for energy

  /// Flat unconstrained parameters.  Layout: [x1 | x2 | x3] with each block
  /// of size d(d+1)/2 (energy/partial), or [m1 | x2 | x3] with m1 of size d
  /// (gap).  x2, x3 are packed symmetric coefficients.
  Eigen::VectorXd params;

  static TriangularFactors zeros(FactorMode mode, Index d, Index k = 0);
  static TriangularFactors from_matrices(const Eigen::MatrixXd& m1,
                                         const Eigen::MatrixXd& m2,
                                         const Eigen::MatrixXd& m3);
  static TriangularFactors partial_from_matrices(Index k,
                                                 const Eigen::MatrixXd& m1,
                                                 const Eigen::MatrixXd& m2,
                                                 const Eigen::MatrixXd& m3);
  static TriangularFactors gap_from_parts(const Eigen::VectorXd& m1,
                                          const Eigen::MatrixXd& m2,
                                          const Eigen::MatrixXd& m3);

  Index m1_size() const;
  Index param_count() const { return m1_size() + 2 * packed_size(d); }

  /// Materialized factors.  m1_matrix is only valid outside gap mode,
  /// m1_row only in gap mode.
  Eigen::MatrixXd m1_matrix() const;
  Eigen::VectorXd m1_row() const;
  Eigen::MatrixXd m2_matrix() const;
  Eigen::MatrixXd m3_matrix() const;

  void check_consistent() const;
};

/// Dense L3 (2d x 2d) from energy- or partial-mode factors.
Eigen::MatrixXd build_l3(const TriangularFactors& f);

/// The 2k rows P_k L3 without forming L3: rows {1..k, d+1..d+k}.  Works in
/// all modes (energy mode uses k = d and reproduces build_l3).
Eigen::MatrixXd projected_l3_rows(const TriangularFactors& f);

/// gamma = L3^T L3, the pure covariance matrix the factors encode.
Eigen::MatrixXd factors_to_cm(const TriangularFactors& f);

// ---------------------------------------------------------------------------
// Costs and gradients
//
// energy cost    f = 1/4 tr(L3 H L3^T)          (value E0 at the minimum)
// partial cost   f = 1/4 tr(P_k L3 H L3^T P_k^T) (value = half the sum of
//                the k smallest symplectic eigenvalues at the minimum)
// The gap estimator is twice the optimized k = 1 partial cost.
//
// Gradients are analytic.  Matrix-level gradients are the true
// unconstrained d/dM derivatives; flat gradients additionally pull x2, x3
// (and x1 outside gap mode) back through the packed symmetric map.
// ---------------------------------------------------------------------------

double energy_cost(const TriangularFactors& f, const QuadraticHamiltonian& h);
double energy_value_and_grad(const TriangularFactors& f,
                             const QuadraticHamiltonian& h,
                             Eigen::VectorXd& grad);

struct FactorGradients {
  Eigen::MatrixXd m1;  // d x d (gap mode: only row 0 is meaningful)
  Eigen::MatrixXd m2;
  Eigen::MatrixXd m3;
};

FactorGradients energy_grad_matrices(const TriangularFactors& f,
                                     const QuadraticHamiltonian& h);

/// Force one specific evaluation path regardless of the structure tag.
/// The block variants require H = V (+) I and work on d x d blocks only;
/// the generic variants always form L3 H.  Both agree to ~1e-15 and the
/// tests hold them to 1e-10 of each other.
double energy_cost_generic(const TriangularFactors& f,
                           const QuadraticHamiltonian& h);
double energy_cost_block(const TriangularFactors& f,
                         const QuadraticHamiltonian& h);
FactorGradients energy_grad_matrices_generic(const TriangularFactors& f,
                                             const QuadraticHamiltonian& h);
FactorGradients energy_grad_matrices_block(const TriangularFactors& f,
                                           const QuadraticHamiltonian& h);

double partial_cost(const TriangularFactors& f, const QuadraticHamiltonian& h,
                    Index k);
double partial_value_and_grad(const TriangularFactors& f,
                              const QuadraticHamiltonian& h, Index k,
                              Eigen::VectorXd& grad);
FactorGradients partial_grad_matrices(const TriangularFactors& f,
                                      const QuadraticHamiltonian& h, Index k);

/// Spectral gap estimate from an optimized k = 1 partial cost.
inline double gap_estimate(double optimized_partial_cost) {
  return 2.0 * optimized_partial_cost;
}

/// Diagonal scaling that turns the flat (packed) gradient into the step a
/// plain matrix-space gradient would take: 1/2 on off-diagonal packed
/// coefficients, 1/4 on diagonal ones, 1 on gap-mode m1 entries.  Fixed-rate
/// descent needs this; without it the packed chain rule doubles the
/// effective learning rate off the diagonal and quadruples it on it.
/// Line-searched methods are insensitive to it.
Eigen::VectorXd matrix_gradient_scaling(const TriangularFactors& f);

// ---------------------------------------------------------------------------
// Finite-difference gradient oracle
// ---------------------------------------------------------------------------

/// Central differences, one coordinate at a time.
Eigen::VectorXd fd_gradient_oracle(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step = 1e-6);

struct GradCheckBlock {
  std::string name;
  double max_rel = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double worst() const;
  bool pass(double tol = 1e-6) const { return worst() <= tol; }
};

/// Compares the analytic flat gradient against central differences at a
/// seeded random point, block by block.  Relative deviations use
/// max(1, |analytic|) denominators.
GradCheckReport check_gradients(const QuadraticHamiltonian& h,
                                FactorMode mode, Index k, std::uint64_t seed);

}  // namespace sympopt
