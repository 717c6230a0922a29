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

#include "sympopt/hamiltonian.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "sympopt/io.hpp"

namespace sympopt {

namespace {

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("symmetric eigensolver failed to converge");
  return es.eigenvalues().minCoeff();
}

/// Smaller eigenvalue of [[lambda, c], [c, 1]], the per-mode pencil of a
/// position-momentum coupled Hamiltonian.
double coupled_branch(double lambda, double c) {
  return 0.5 * ((lambda + 1.0) -
                std::sqrt((lambda - 1.0) * (lambda - 1.0) + 4.0 * c * c));
}

std::vector<std::array<Index, 3>> site_coordinates(const LatticeSpec& spec) {
  std::array<Index, 3> ext = {1, 1, 1};
  const std::size_t m = spec.dims.size();
  for (std::size_t i = 0; i < m; ++i) ext[3 - m + i] = spec.dims[i];
  std::vector<std::array<Index, 3>> coords;
  coords.reserve(static_cast<std::size_t>(ext[0] * ext[1] * ext[2]));
  for (Index x = 0; x < ext[0]; ++x)
    for (Index y = 0; y < ext[1]; ++y)
      for (Index z = 0; z < ext[2]; ++z) coords.push_back({x, y, z});
  return coords;
}

}  // namespace

Index LatticeSpec::sites() const {
  Index n = 1;
  for (Index e : dims) n *= e;
  return n;
}

void LatticeSpec::validate() const {
  if (dims.empty() || dims.size() > 3)
    throw InvalidInput("LatticeSpec: need 1 to 3 lattice extents");
  for (Index e : dims)
    if (e < 1) throw InvalidInput("LatticeSpec: extents must be positive");
  if (!(rho > 0.0)) throw InvalidInput("LatticeSpec: rho must be positive");
  if (!std::isfinite(coupling_c))
    throw InvalidInput("LatticeSpec: coupling must be finite");
}

Eigen::MatrixXd dipole_matrix(const LatticeSpec& spec) {
  spec.validate();
  const auto coords = site_coordinates(spec);
  const Index n = static_cast<Index>(coords.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      Eigen::Vector3d r;
      for (int i = 0; i < 3; ++i)
        r(i) = static_cast<double>(coords[b][i] - coords[a][i]);
      const double dist = r.norm();
      const Eigen::Vector3d nhat = r / dist;
      const Eigen::Matrix3d block =
          (Eigen::Matrix3d::Identity() - 3.0 * nhat * nhat.transpose()) /
          (dist * dist * dist);
      t.block<3, 3>(3 * a, 3 * b) = block;
      t.block<3, 3>(3 * b, 3 * a) = block;
    }
  }
  return t;
}

QuadraticHamiltonian build_qdo(const LatticeSpec& spec) {
  spec.validate();
  const Index d = spec.modes();
  Eigen::MatrixXd v = dipole_matrix(spec) / (spec.rho * spec.rho * spec.rho);
  v.diagonal().array() += 1.0;
  QuadraticHamiltonian out = hamiltonian_from_position_block(
      std::move(v), spec.coupling_c);
  if (out.d != d) throw NumericalFailure("build_qdo: dimension bookkeeping");
  return out;
}

QuadraticHamiltonian hamiltonian_from_position_block(Eigen::MatrixXd v,
                                                     double c) {
  const Index d = v.rows();
  if (d < 1 || v.cols() != d)
    throw InvalidInput("hamiltonian_from_position_block: V must be square");
  const double scale = std::max(1.0, v.norm());
  if ((v - v.transpose()).norm() > 1e-12 * scale)
    throw InvalidInput("hamiltonian_from_position_block: V must be symmetric");

  const double vmin = min_symmetric_eigenvalue(v);
  const double hmin = (c == 0.0) ? std::min(vmin, 1.0)
                                 : coupled_branch(vmin, c);
  if (hmin <= 0.0)
    throw NumericalFailure(
        "Hamiltonian is not positive definite (smallest eigenvalue " +
        std::to_string(hmin) +
        "); increase the lattice spacing or reduce |c|");

  QuadraticHamiltonian out;
  out.d = d;
  out.structure = (c == 0.0) ? HamiltonianStructure::block_diagonal
                             : HamiltonianStructure::pm_coupled;
  out.coupling_c = c;
  out.min_eig = hmin;
  out.h = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  out.h.topLeftCorner(d, d) = v;
  out.h.bottomRightCorner(d, d).setIdentity();
  if (c != 0.0) {
    out.h.topRightCorner(d, d) = c * Eigen::MatrixXd::Identity(d, d);
    out.h.bottomLeftCorner(d, d) = c * Eigen::MatrixXd::Identity(d, d);
  }
  out.v = std::move(v);
  return out;
}

QuadraticHamiltonian hamiltonian_from_matrix(Eigen::MatrixXd h) {
  if (h.rows() != h.cols() || h.rows() < 2 || h.rows() % 2 != 0)
    throw InvalidInput(
        "hamiltonian_from_matrix: matrix must be square with even dimension");
  const double scale = std::max(1.0, h.norm());
  if ((h - h.transpose()).norm() > 1e-12 * scale)
    throw InvalidInput("hamiltonian_from_matrix: matrix must be symmetric");
  h = 0.5 * (h + h.transpose()).eval();

  const double hmin = min_symmetric_eigenvalue(h);
  if (hmin <= 0.0)
    throw NumericalFailure(
        "Hamiltonian is not positive definite (smallest eigenvalue " +
        std::to_string(hmin) + ")");

  const Index d = h.rows() / 2;
  QuadraticHamiltonian out;
  out.d = d;
  out.structure = HamiltonianStructure::generic;
  out.min_eig = hmin;
  out.v = h.topLeftCorner(d, d);
  out.h = std::move(h);
  return out;
}

QuadraticHamiltonian load_hamiltonian(const std::string& path) {
  return hamiltonian_from_matrix(read_mat1(path));
}

}  // namespace sympopt
