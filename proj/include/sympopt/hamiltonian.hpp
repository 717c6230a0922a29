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

#include <string>
#include <vector>

#include "sympopt/core.hpp"

namespace sympopt {

// ---------------------------------------------------------------------------
// Lattices of coupled quantum Drude oscillators
//
// N isotropic three-dimensional oscillators sit on the integer sites of a
// 1-, 2- or 3-dimensional lattice with open boundaries and nearest-site
// spacing rho (in units of the oscillator length).  Each site contributes
// three modes (its dipole components), so d = 3N.  The dims extents occupy
// the trailing coordinate axes: a chain runs along z and a square lattice
// spans (y, z).
// ---------------------------------------------------------------------------

struct LatticeSpec {
  std::vector<Index> dims;  // 1 to 3 positive extents
  double rho = 2.0;         // lattice spacing
  double coupling_c = 0.0;  // position-momentum coupling strength

  Index sites() const;
  Index modes() const { return 3 * sites(); }
  void validate() const;
};

/// All-to-all dipole coupling matrix (3N x 3N).  The (a, b) site block is
/// (I - 3 n n^T) / r^3 with r the site separation in lattice units and n
/// its direction; diagonal blocks vanish.
Eigen::MatrixXd dipole_matrix(const LatticeSpec& spec);

// ---------------------------------------------------------------------------
// Quadratic Hamiltonians
// ---------------------------------------------------------------------------

enum class HamiltonianStructure {
  block_diagonal,  // H = V (+) I
  pm_coupled,      // H = [[V, cI], [cI, I]]
  generic,         // arbitrary SPD 2d x 2d
};

struct QuadraticHamiltonian {
  Index d = 0;
  HamiltonianStructure structure = HamiltonianStructure::generic;
  Eigen::MatrixXd h;  // 2d x 2d, symmetric positive definite
  Eigen::MatrixXd v;  // d x d position-position block
  double coupling_c = 0.0;
  double min_eig = 0.0;  // smallest ordinary eigenvalue of h
};

/// H for a QDO lattice: V = I + rho^{-3} T with T the dipole matrix, plus
/// an optional uniform position-momentum coupling c.  Throws
/// NumericalFailure when the parameters leave the stable (SPD) regime.
QuadraticHamiltonian build_qdo(const LatticeSpec& spec);

/// Wraps an explicit position block (and optional coupling c) with the
/// matching structure tag.  V must be SPD with all eigenvalues > c^2.
QuadraticHamiltonian hamiltonian_from_position_block(Eigen::MatrixXd v,
                                                     double c = 0.0);

/// Validates and tags an arbitrary dense quadratic form: even dimension,
/// symmetric within 1e-12 relative (then symmetrized exactly), positive
/// definite.
QuadraticHamiltonian hamiltonian_from_matrix(Eigen::MatrixXd h);

/// Reads a dense Hamiltonian from a whitespace matrix file.
QuadraticHamiltonian load_hamiltonian(const std::string& path);

}  // namespace sympopt
