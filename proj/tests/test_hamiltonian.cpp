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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <sympopt/gaussian.hpp>
#include <sympopt/hamiltonian.hpp>
#include <sympopt/io.hpp>

using namespace sympopt;

TEST_CASE("lattice spec counts sites and validates extents") {
  CHECK(LatticeSpec{{4}, 2.0, 0.0}.sites() == 4);
  CHECK(LatticeSpec{{3, 5}, 2.0, 0.0}.modes() == 45);
  CHECK(LatticeSpec{{2, 2, 2}, 2.0, 0.0}.sites() == 8);
  CHECK_THROWS_AS(LatticeSpec({}, 2.0, 0.0).validate(), InvalidInput);
  CHECK_THROWS_AS(LatticeSpec({2, 2, 2, 2}, 2.0, 0.0).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(LatticeSpec({0, 3}, 2.0, 0.0).validate(), InvalidInput);
  CHECK_THROWS_AS(LatticeSpec({3}, -1.0, 0.0).validate(), InvalidInput);
}

TEST_CASE("two-site chain dipole block is diag(1, 1, -2)/r^3") {
  // chain extends along z, so the separation direction is z and the block
  // between the sites is (I - 3 z z^T) / r^3
  LatticeSpec spec{{2}, 2.0, 0.0};
  Eigen::MatrixXd t = dipole_matrix(spec);
  REQUIRE(t.rows() == 6);
  CHECK(t.topLeftCorner(3, 3).norm() == 0.0);
  Eigen::Matrix3d expect = Eigen::Vector3d(1.0, 1.0, -2.0).asDiagonal();
  CHECK((t.block(0, 3, 3, 3) - expect).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((t - t.transpose()).norm() == 0.0);
}

TEST_CASE("dipole blocks decay as the separation cubed") {
  LatticeSpec spec{{3}, 2.0, 0.0};
  Eigen::MatrixXd t = dipole_matrix(spec);
  // sites 0 and 2 sit two spacings apart: same tensor at 1/8 the strength
  CHECK((8.0 * t.block(0, 6, 3, 3) - t.block(0, 3, 3, 3))
            .lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("square-lattice diagonal neighbors couple the in-plane axes") {
  LatticeSpec spec{{2, 2}, 2.0, 0.0};
  Eigen::MatrixXd t = dipole_matrix(spec);
  // sites 0=(0,0) and 3=(1,1) along the (y+z)/sqrt(2) diagonal, r = sqrt(2)
  Eigen::Vector3d n(0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  Eigen::Matrix3d expect =
      (Eigen::Matrix3d::Identity() - 3.0 * n * n.transpose()) /
      std::pow(std::sqrt(2.0), 3);
  CHECK((t.block(0, 9, 3, 3) - expect).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("QDO Hamiltonian assembles V = I + rho^-3 T") {
  LatticeSpec spec{{2, 2}, 1.9, 0.0};
  auto h = build_qdo(spec);
  CHECK(h.d == 12);
  CHECK(h.structure == HamiltonianStructure::block_diagonal);
  Eigen::MatrixXd expect =
      Eigen::MatrixXd::Identity(12, 12) +
      std::pow(1.9, -3.0) * dipole_matrix(spec);
  CHECK((h.v - expect).norm() == 0.0);
  CHECK((h.h.topLeftCorner(12, 12) - h.v).norm() == 0.0);
  CHECK((h.h.bottomRightCorner(12, 12) - Eigen::MatrixXd::Identity(12, 12))
            .norm() == 0.0);
  CHECK(h.h.topRightCorner(12, 12).norm() == 0.0);
  CHECK(h.min_eig > 0.0);
}

TEST_CASE("position-momentum coupling fills the off-diagonal blocks") {
  LatticeSpec spec{{2}, 2.0, 0.3};
  auto h = build_qdo(spec);
  CHECK(h.structure == HamiltonianStructure::pm_coupled);
  CHECK(h.coupling_c == 0.3);
  Eigen::MatrixXd off = h.h.topRightCorner(6, 6);
  CHECK((off - 0.3 * Eigen::MatrixXd::Identity(6, 6)).norm() == 0.0);
  CHECK((h.h - h.h.transpose()).norm() == 0.0);

  // the coupled spectrum stays positive exactly while lambda_min(V) > c^2
  auto sd = symplectic_spectrum(h.h);
  CHECK(sd.eps.minCoeff() > 0.0);
}

TEST_CASE("unstable parameters are rejected, not silently accepted") {
  // rho small enough that the attractive dipole branch crosses zero
  LatticeSpec tight{{8}, 0.9, 0.0};
  CHECK_THROWS_AS(build_qdo(tight), NumericalFailure);
  // c^2 above the smallest V eigenvalue breaks positivity
  LatticeSpec overcoupled{{2}, 2.0, 0.97};
  CHECK_THROWS_AS(build_qdo(overcoupled), NumericalFailure);
}

TEST_CASE("coupled spectrum has the closed form sqrt(lambda - c^2)") {
  // V and the coupling commute (the off-block is c I), so H splits into a
  // 2x2 symbol [[lambda, c], [c, 1]] per V eigenvalue lambda, whose single
  // Williamson invariant is the determinant root.
  LatticeSpec spec{{3}, 2.2, 0.25};
  auto h = build_qdo(spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.v);
  Eigen::VectorXd expect(h.d);
  for (Index i = 0; i < h.d; ++i)
    expect(i) = std::sqrt(es.eigenvalues()(i) - 0.25 * 0.25);
  std::sort(expect.data(), expect.data() + expect.size());
  auto sd = symplectic_spectrum(h.h);
  CHECK((sd.eps - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
  // coupling only ever softens the modes
  auto sd0 = symplectic_spectrum_from_position_block(h.v);
  for (Index i = 0; i < h.d; ++i) CHECK(sd.eps(i) < sd0.eps(i));
}

TEST_CASE("generic matrix loader validates and tags") {
  Eigen::MatrixXd v(2, 2);
  v << 1.5, 0.2, 0.2, 1.1;
  auto hb = hamiltonian_from_position_block(v, 0.0);
  CHECK(hb.structure == HamiltonianStructure::block_diagonal);

  auto hg = hamiltonian_from_matrix(hb.h);
  CHECK(hg.structure == HamiltonianStructure::generic);
  CHECK((hg.h - hb.h).norm() == 0.0);
  CHECK((hg.v - v).norm() == 0.0);

  CHECK_THROWS_AS(hamiltonian_from_matrix(Eigen::MatrixXd::Identity(3, 3)),
                  InvalidInput);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(4, 4);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(hamiltonian_from_matrix(asym), InvalidInput);
  CHECK_THROWS_AS(hamiltonian_from_matrix(-Eigen::MatrixXd::Identity(4, 4)),
                  NumericalFailure);
}

TEST_CASE("Hamiltonians round trip through matrix files") {
  LatticeSpec spec{{2}, 2.1, 0.1};
  auto h = build_qdo(spec);
  auto dir = std::filesystem::temp_directory_path() / "sympopt_test_h";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "h.mat").string();
  write_mat1(path, h.h);
  auto h2 = load_hamiltonian(path);
  CHECK(h2.d == h.d);
  CHECK((h2.h - h.h).norm() == 0.0);
  CHECK_THROWS_AS(load_hamiltonian((dir / "missing.mat").string()),
                  InvalidInput);
  std::filesystem::remove_all(dir);
}
