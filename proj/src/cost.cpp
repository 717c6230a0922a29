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

#include "sympopt/cost.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sympopt/opcount.hpp"

namespace sympopt {

namespace {

template <typename A, typename B>
Eigen::MatrixXd tracked(const A& a, const B& b) {
  opcount::record_product(a.rows(), a.cols(), b.cols());
  return a * b;
}

void require_symmetric_factor(const Eigen::MatrixXd& m, const char* who) {
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > 1e-12 * scale)
    throw InvalidInput(std::string("TriangularFactors: ") + who +
                       " must be symmetric");
}

Index default_k(FactorMode mode, Index d, Index k) {
  switch (mode) {
    case FactorMode::energy:
      return d;
    case FactorMode::gap:
      return 1;
    case FactorMode::partial:
      if (k < 1 || k > d)
        throw InvalidInput("TriangularFactors: partial mode needs k in [1, d]");
      return k;
  }
  throw InvalidInput("TriangularFactors: unknown mode");
}

// Shared O(k d^2) evaluation of the projected cost
//   f = 1/4 tr(P_k L3 H L3^T P_k^T)
// and, on request, its gradients.  Only the k relevant rows of each block
// of P_k L3 are ever formed; H enters through a (2k x 2d) x (2d x 2d)
// product, or through d x d block products when its structure allows and
// use_structure is set.
double eval_rows(const TriangularFactors& f, const QuadraticHamiltonian& h,
                 Index k, bool use_structure, Eigen::VectorXd* flat_grad,
                 FactorGradients* mats) {
  const Index d = f.d;
  const Index t = packed_size(d);
  const Index m1n = f.m1_size();

  Eigen::MatrixXd r1;  // E_k M1, the only slice of M1 the cost sees
  if (f.mode == FactorMode::gap) {
    r1 = f.params.head(d).transpose();
  } else {
    r1 = materialize_symmetric(f.params.head(t), d).topRows(k);
  }
  const Eigen::MatrixXd m2 = materialize_symmetric(f.params.segment(m1n, t), d);
  const Eigen::MatrixXd m3 = materialize_symmetric(f.params.tail(t), d);

  const Eigen::MatrixXd r1m2 = tracked(r1, m2);
  const Eigen::MatrixXd r1m2m3 = tracked(r1m2, m3);

  Eigen::MatrixXd x(2 * k, 2 * d);
  x.topLeftCorner(k, d) = r1m2;
  x.topLeftCorner(k, d).diagonal().array() += 1.0;
  x.topRightCorner(k, d) = m3.topRows(k) + r1m2m3 + r1;
  x.bottomLeftCorner(k, d) = m2.topRows(k);
  x.bottomRightCorner(k, d) = tracked(m2.topRows(k), m3);
  x.bottomRightCorner(k, d).diagonal().array() += 1.0;

  const bool structured =
      use_structure && h.structure != HamiltonianStructure::generic;
  Eigen::MatrixXd b(2 * k, 2 * d);
  if (structured) {
    b.leftCols(d) = tracked(x.leftCols(d), h.v);
    b.rightCols(d) = x.rightCols(d);
    if (h.coupling_c != 0.0) {
      b.leftCols(d) += h.coupling_c * x.rightCols(d);
      b.rightCols(d) += h.coupling_c * x.leftCols(d);
    }
  } else {
    b = tracked(x, h.h);
  }

  const double cost = 0.25 * x.cwiseProduct(b).sum();
  if (flat_grad == nullptr && mats == nullptr) return cost;

  const auto xk = b.topLeftCorner(k, d);
  const auto yk = b.topRightCorner(k, d);
  const auto zk = b.bottomLeftCorner(k, d);
  const auto wk = b.bottomRightCorner(k, d);

  const Eigen::MatrixXd ykm3 = tracked(yk, m3);
  const Eigen::MatrixXd g1rows = 0.5 * (yk + tracked(ykm3 + xk, m2));

  Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(d, d);
  g2.topRows(k) = zk + tracked(wk, m3);
  g2.noalias() += tracked(r1.transpose(), xk + ykm3);
  g2 *= 0.5;

  Eigen::MatrixXd g3 = Eigen::MatrixXd::Zero(d, d);
  g3.topRows(k) = yk;
  g3.noalias() += tracked(m2.leftCols(k), wk);
  g3.noalias() += tracked(r1m2.transpose(), yk);
  g3 *= 0.5;

  if (mats != nullptr) {
    mats->m1 = Eigen::MatrixXd::Zero(d, d);
    mats->m1.topRows(k) = g1rows;
    mats->m2 = g2;
    mats->m3 = g3;
  }
  if (flat_grad != nullptr) {
    flat_grad->resize(f.param_count());
    if (f.mode == FactorMode::gap) {
      flat_grad->head(d) = g1rows.row(0).transpose();
    } else {
      Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(d, d);
      g1.topRows(k) = g1rows;
      flat_grad->head(t) = chain_gradient_to_params(g1);
    }
    flat_grad->segment(m1n, t) = chain_gradient_to_params(g2);
    flat_grad->tail(t) = chain_gradient_to_params(g3);
  }
  return cost;
}

// Energy fast path for H = V (+) I: everything stays d x d.
double eval_block(const TriangularFactors& f, const QuadraticHamiltonian& h,
                  Eigen::VectorXd* flat_grad, FactorGradients* mats) {
  const Index d = f.d;
  const Index t = packed_size(d);

  const Eigen::MatrixXd m1 = materialize_symmetric(f.params.head(t), d);
  const Eigen::MatrixXd m2 = materialize_symmetric(f.params.segment(t, t), d);
  const Eigen::MatrixXd m3 = materialize_symmetric(f.params.tail(t), d);

  const Eigen::MatrixXd m1m2 = tracked(m1, m2);
  Eigen::MatrixXd a = m1m2;
  a.diagonal().array() += 1.0;
  Eigen::MatrixXd dd = tracked(m2, m3);
  dd.diagonal().array() += 1.0;
  const Eigen::MatrixXd bb = m3 + tracked(m1, dd);

  const Eigen::MatrixXd av = tracked(a, h.v);
  const Eigen::MatrixXd cv = tracked(m2, h.v);

  const double cost = 0.25 * (av.cwiseProduct(a).sum() + bb.squaredNorm() +
                              cv.cwiseProduct(m2).sum() + dd.squaredNorm());
  if (flat_grad == nullptr && mats == nullptr) return cost;

  const Eigen::MatrixXd bm3 = tracked(bb, m3);
  const Eigen::MatrixXd g1 =
      0.5 * (tracked(bb, dd.transpose()) + tracked(av, m2));
  const Eigen::MatrixXd g2 =
      0.5 * (cv + tracked(dd, m3) + tracked(m1, av + bm3));
  const Eigen::MatrixXd g3 =
      0.5 * (tracked(m1m2.transpose(), bb) + bb + tracked(m2, dd));

  if (mats != nullptr) {
    mats->m1 = g1;
    mats->m2 = g2;
    mats->m3 = g3;
  }
  if (flat_grad != nullptr) {
    flat_grad->resize(f.param_count());
    flat_grad->head(t) = chain_gradient_to_params(g1);
    flat_grad->segment(t, t) = chain_gradient_to_params(g2);
    flat_grad->tail(t) = chain_gradient_to_params(g3);
  }
  return cost;
}

void require_mode(const TriangularFactors& f,
                  std::initializer_list<FactorMode> allowed,
                  const char* who) {
  f.check_consistent();
  for (FactorMode m : allowed)
    if (f.mode == m) return;
  throw InvalidInput(std::string(who) + ": factor mode not supported here");
}

void require_matching(const TriangularFactors& f,
                      const QuadraticHamiltonian& h, const char* who) {
  if (f.d != h.d)
    throw InvalidInput(std::string(who) +
                       ": factor and Hamiltonian dimensions differ");
}

}  // namespace

TriangularFactors TriangularFactors::zeros(FactorMode mode, Index d, Index k) {
  if (d < 1) throw InvalidInput("TriangularFactors: d must be >= 1");
  TriangularFactors f;
  f.mode = mode;
  f.d = d;
  f.k = default_k(mode, d, k);
  f.params = Eigen::VectorXd::Zero(f.param_count());
  return f;
}

TriangularFactors TriangularFactors::from_matrices(const Eigen::MatrixXd& m1,
                                                   const Eigen::MatrixXd& m2,
                                                   const Eigen::MatrixXd& m3) {
  const Index d = m1.rows();
  require_symmetric_factor(m1, "M1");
  require_symmetric_factor(m2, "M2");
  require_symmetric_factor(m3, "M3");
  if (m2.rows() != d || m3.rows() != d)
    throw InvalidInput("TriangularFactors: factor dimensions differ");
  TriangularFactors f = zeros(FactorMode::energy, d);
  const Index t = packed_size(d);
  f.params.head(t) = pack_symmetric(m1).coeffs;
  f.params.segment(t, t) = pack_symmetric(m2).coeffs;
  f.params.tail(t) = pack_symmetric(m3).coeffs;
  return f;
}

TriangularFactors TriangularFactors::partial_from_matrices(
    Index k, const Eigen::MatrixXd& m1, const Eigen::MatrixXd& m2,
    const Eigen::MatrixXd& m3) {
  TriangularFactors f = from_matrices(m1, m2, m3);
  f.mode = FactorMode::partial;
  f.k = default_k(FactorMode::partial, f.d, k);
  return f;
}

TriangularFactors TriangularFactors::gap_from_parts(const Eigen::VectorXd& m1,
                                                    const Eigen::MatrixXd& m2,
                                                    const Eigen::MatrixXd& m3) {
  const Index d = m1.size();
  require_symmetric_factor(m2, "M2");
  require_symmetric_factor(m3, "M3");
  if (m2.rows() != d || m3.rows() != d)
    throw InvalidInput("TriangularFactors: factor dimensions differ");
  TriangularFactors f = zeros(FactorMode::gap, d);
  const Index t = packed_size(d);
  f.params.head(d) = m1;
  f.params.segment(d, t) = pack_symmetric(m2).coeffs;
  f.params.tail(t) = pack_symmetric(m3).coeffs;
  return f;
}

Index TriangularFactors::m1_size() const {
  return mode == FactorMode::gap ? d : packed_size(d);
}

Eigen::MatrixXd TriangularFactors::m1_matrix() const {
  if (mode == FactorMode::gap)
    throw InvalidInput("TriangularFactors: gap mode stores m1 as a vector");
  return materialize_symmetric(params.head(packed_size(d)), d);
}

Eigen::VectorXd TriangularFactors::m1_row() const {
  if (mode != FactorMode::gap)
    throw InvalidInput("TriangularFactors: m1_row is gap-mode only");
  return params.head(d);
}

Eigen::MatrixXd TriangularFactors::m2_matrix() const {
  return materialize_symmetric(params.segment(m1_size(), packed_size(d)), d);
}

Eigen::MatrixXd TriangularFactors::m3_matrix() const {
  return materialize_symmetric(params.tail(packed_size(d)), d);
}

void TriangularFactors::check_consistent() const {
  if (d < 1) throw InvalidInput("TriangularFactors: d must be >= 1");
  const Index want_k = mode == FactorMode::energy ? d
                       : mode == FactorMode::gap  ? 1
                                                  : k;
  if (k != want_k || k < 1 || k > d)
    throw InvalidInput("TriangularFactors: inconsistent pair count k");
  if (params.size() != param_count())
    throw InvalidInput("TriangularFactors: parameter vector has wrong size");
}

Eigen::MatrixXd build_l3(const TriangularFactors& f) {
  require_mode(f, {FactorMode::energy, FactorMode::partial}, "build_l3");
  const Index d = f.d;
  const Eigen::MatrixXd m1 = f.m1_matrix();
  const Eigen::MatrixXd m2 = f.m2_matrix();
  const Eigen::MatrixXd m3 = f.m3_matrix();

  const Eigen::MatrixXd m1m2 = tracked(m1, m2);
  Eigen::MatrixXd l3(2 * d, 2 * d);
  l3.topLeftCorner(d, d) = m1m2;
  l3.topLeftCorner(d, d).diagonal().array() += 1.0;
  l3.topRightCorner(d, d) = m3 + tracked(m1m2, m3) + m1;
  l3.bottomLeftCorner(d, d) = m2;
  l3.bottomRightCorner(d, d) = tracked(m2, m3);
  l3.bottomRightCorner(d, d).diagonal().array() += 1.0;
  return l3;
}

Eigen::MatrixXd projected_l3_rows(const TriangularFactors& f) {
  f.check_consistent();
  const Index d = f.d;
  const Index k = f.k;
  Eigen::MatrixXd r1;
  if (f.mode == FactorMode::gap)
    r1 = f.params.head(d).transpose();
  else
    r1 = f.m1_matrix().topRows(k);
  const Eigen::MatrixXd m2 = f.m2_matrix();
  const Eigen::MatrixXd m3 = f.m3_matrix();

  const Eigen::MatrixXd r1m2 = tracked(r1, m2);
  Eigen::MatrixXd x(2 * k, 2 * d);
  x.topLeftCorner(k, d) = r1m2;
  x.topLeftCorner(k, d).diagonal().array() += 1.0;
  x.topRightCorner(k, d) = m3.topRows(k) + tracked(r1m2, m3) + r1;
  x.bottomLeftCorner(k, d) = m2.topRows(k);
  x.bottomRightCorner(k, d) = tracked(m2.topRows(k), m3);
  x.bottomRightCorner(k, d).diagonal().array() += 1.0;
  return x;
}

Eigen::MatrixXd factors_to_cm(const TriangularFactors& f) {
  const Eigen::MatrixXd l3 = build_l3(f);
  Eigen::MatrixXd g = tracked(l3.transpose(), l3);
  g = 0.5 * (g + g.transpose()).eval();
  return g;
}

double energy_cost(const TriangularFactors& f, const QuadraticHamiltonian& h) {
  require_mode(f, {FactorMode::energy}, "energy_cost");
  require_matching(f, h, "energy_cost");
  if (h.structure == HamiltonianStructure::block_diagonal)
    return eval_block(f, h, nullptr, nullptr);
  return eval_rows(f, h, f.d, true, nullptr, nullptr);
}

double energy_value_and_grad(const TriangularFactors& f,
                             const QuadraticHamiltonian& h,
                             Eigen::VectorXd& grad) {
  require_mode(f, {FactorMode::energy}, "energy_value_and_grad");
  require_matching(f, h, "energy_value_and_grad");
  if (h.structure == HamiltonianStructure::block_diagonal)
    return eval_block(f, h, &grad, nullptr);
  return eval_rows(f, h, f.d, true, &grad, nullptr);
}

FactorGradients energy_grad_matrices(const TriangularFactors& f,
                                     const QuadraticHamiltonian& h) {
  require_mode(f, {FactorMode::energy}, "energy_grad_matrices");
  require_matching(f, h, "energy_grad_matrices");
  FactorGradients g;
  if (h.structure == HamiltonianStructure::block_diagonal)
    eval_block(f, h, nullptr, &g);
  else
    eval_rows(f, h, f.d, true, nullptr, &g);
  return g;
}

double energy_cost_generic(const TriangularFactors& f,
                           const QuadraticHamiltonian& h) {
  require_mode(f, {FactorMode::energy}, "energy_cost_generic");
  require_matching(f, h, "energy_cost_generic");
  return eval_rows(f, h, f.d, false, nullptr, nullptr);
}

double energy_cost_block(const TriangularFactors& f,
                         const QuadraticHamiltonian& h) {
  require_mode(f, {FactorMode::energy}, "energy_cost_block");
  require_matching(f, h, "energy_cost_block");
  if (h.structure != HamiltonianStructure::block_diagonal)
    throw InvalidInput("energy_cost_block: Hamiltonian is not H = V (+) I");
  return eval_block(f, h, nullptr, nullptr);
}

FactorGradients energy_grad_matrices_generic(const TriangularFactors& f,
                                             const QuadraticHamiltonian& h) {
  require_mode(f, {FactorMode::energy}, "energy_grad_matrices_generic");
  require_matching(f, h, "energy_grad_matrices_generic");
  FactorGradients g;
  eval_rows(f, h, f.d, false, nullptr, &g);
  return g;
}

FactorGradients energy_grad_matrices_block(const TriangularFactors& f,
                                           const QuadraticHamiltonian& h) {
  require_mode(f, {FactorMode::energy}, "energy_grad_matrices_block");
  require_matching(f, h, "energy_grad_matrices_block");
  if (h.structure != HamiltonianStructure::block_diagonal)
    throw InvalidInput(
        "energy_grad_matrices_block: Hamiltonian is not H = V (+) I");
  FactorGradients g;
  eval_block(f, h, nullptr, &g);
  return g;
}

double partial_cost(const TriangularFactors& f, const QuadraticHamiltonian& h,
                    Index k) {
  require_mode(f, {FactorMode::gap, FactorMode::partial}, "partial_cost");
  require_matching(f, h, "partial_cost");
  if (k != f.k)
    throw InvalidInput("partial_cost: k disagrees with the factor mode");
  return eval_rows(f, h, k, true, nullptr, nullptr);
}

double partial_value_and_grad(const TriangularFactors& f,
                              const QuadraticHamiltonian& h, Index k,
                              Eigen::VectorXd& grad) {
  require_mode(f, {FactorMode::gap, FactorMode::partial},
               "partial_value_and_grad");
  require_matching(f, h, "partial_value_and_grad");
  if (k != f.k)
    throw InvalidInput("partial_value_and_grad: k disagrees with the factors");
  return eval_rows(f, h, k, true, &grad, nullptr);
}

FactorGradients partial_grad_matrices(const TriangularFactors& f,
                                      const QuadraticHamiltonian& h, Index k) {
  require_mode(f, {FactorMode::gap, FactorMode::partial},
               "partial_grad_matrices");
  require_matching(f, h, "partial_grad_matrices");
  if (k != f.k)
    throw InvalidInput("partial_grad_matrices: k disagrees with the factors");
  FactorGradients g;
  eval_rows(f, h, k, true, nullptr, &g);
  return g;
}

Eigen::VectorXd matrix_gradient_scaling(const TriangularFactors& f) {
  f.check_consistent();
  Eigen::VectorXd s = Eigen::VectorXd::Ones(f.params.size());
  const Index d = f.d;
  auto fill_packed = [&](Index base) {
    for (Index i = 0; i < d; ++i)
      for (Index j = i; j < d; ++j)
        s(base + packed_index(d, i, j)) = (i == j) ? 0.25 : 0.5;
  };
  if (f.mode != FactorMode::gap) fill_packed(0);
  const Index t = packed_size(d);
  fill_packed(f.m1_size());
  fill_packed(f.m1_size() + t);
  return s;
}

Eigen::VectorXd fd_gradient_oracle(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw InvalidInput("fd_gradient_oracle: step must be > 0");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    probe(i) = xi + step;
    const double up = f(probe);
    probe(i) = xi - step;
    const double dn = f(probe);
    probe(i) = xi;
    g(i) = (up - dn) / (2.0 * step);
  }
  return g;
}

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& b : blocks) w = std::max(w, b.max_rel);
  return w;
}

GradCheckReport check_gradients(const QuadraticHamiltonian& h, FactorMode mode,
                                Index k, std::uint64_t seed) {
  const Index d = h.d;
  TriangularFactors f = TriangularFactors::zeros(mode, d, k);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.3);
  for (Index i = 0; i < f.params.size(); ++i) f.params(i) = dist(rng);

  Eigen::VectorXd analytic;
  if (mode == FactorMode::energy)
    energy_value_and_grad(f, h, analytic);
  else
    partial_value_and_grad(f, h, f.k, analytic);

  auto cost_at = [&](const Eigen::VectorXd& p) {
    TriangularFactors g = f;
    g.params = p;
    return mode == FactorMode::energy ? energy_cost(g, h)
                                      : partial_cost(g, h, g.k);
  };
  const Eigen::VectorXd fd = fd_gradient_oracle(cost_at, f.params);

  auto block_rel = [&](Index lo, Index n) {
    double worst = 0.0;
    for (Index i = lo; i < lo + n; ++i) {
      const double rel = std::abs(analytic(i) - fd(i)) /
                         std::max(1.0, std::abs(analytic(i)));
      worst = std::max(worst, rel);
    }
    return worst;
  };

  const Index m1n = f.m1_size();
  const Index t = packed_size(d);
  GradCheckReport report;
  report.blocks = {{"m1", block_rel(0, m1n)},
                   {"m2", block_rel(m1n, t)},
                   {"m3", block_rel(m1n + t, t)}};
  return report;
}

}  // namespace sympopt
