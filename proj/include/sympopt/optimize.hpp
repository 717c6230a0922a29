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

#include "sympopt/cost.hpp"

namespace sympopt {

// ---------------------------------------------------------------------------
// Unconstrained minimization
//
// Two methods share one interface: nonlinear conjugate gradients with an
// interpolating strong-Wolfe line search (the default), and plain gradient
// descent with classical momentum (for fixed-budget runs).  Every call to
// the cost function is one "step"; traces record all of them, including
// rejected line-search probes, so step counts in reports are honest work
// counts rather than iteration counts.
// ---------------------------------------------------------------------------

enum class OptMethod { cg, gd_momentum };

/// line_search_failure covers both an exhausted probe budget and a run of
/// accepted steps with no decrease resolvable at double precision (the
/// requested tolerance sits below the cost's floating-point floor).  In
/// both cases the best point seen is returned.
enum class OptStatus { converged, step_cap, line_search_failure };

struct LineSearchConfig {
  double c1 = 1e-4;     // sufficient-decrease slope fraction
  double c2 = 0.01;     // curvature slope fraction; tight, so accepted steps
                        // sit close to the line minimum and conjugacy holds
  int max_probes = 25;  // cost calls allowed per search
};

struct OptimizerConfig {
  OptMethod method = OptMethod::cg;
  double tol = 1e-5;        // stop when ||grad||_inf <= tol
  long max_steps = 20000;   // cap on cost-function calls
  double learning_rate = 0.26;  // gd_momentum only
  double momentum = 0.95;       // gd_momentum only
  LineSearchConfig line_search;

  void validate() const;
};

struct StepRecord {
  long step = 0;        // 1-based cost-call index
  double cost = 0.0;
  double grad_norm = 0.0;  // infinity norm
  double elapsed_s = 0.0;
};

struct ConvergenceTrace {
  std::vector<StepRecord> records;  // one per cost call
  std::vector<long> accepted;       // call indices of accepted iterates
  OptStatus status = OptStatus::converged;
  long iterations = 0;              // accepted updates
  std::string init_note;            // provenance of the starting point
};

struct MinimizeResult {
  Eigen::VectorXd x;   // best parameters seen
  double cost = 0.0;   // cost at x
  ConvergenceTrace trace;
};

/// Cost callable: returns the value and fills the gradient.
using CostGradFn =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Minimizes fn from init.  Throws NumericalFailure on non-finite values.
/// The returned point is never worse than the initial one.
///
/// step_scale, when non-empty, rescales the gradient componentwise inside
/// gd_momentum updates (descent in a diagonally re-metrized space).  It
/// never affects convergence tests or CG, whose line search is invariant
/// under such rescaling anyway.
MinimizeResult minimize(const CostGradFn& fn, Eigen::VectorXd init,
                        const OptimizerConfig& cfg,
                        const Eigen::VectorXd& step_scale = {});

// ---------------------------------------------------------------------------
// Problem-level drivers
// ---------------------------------------------------------------------------

struct SolveResult {
  TriangularFactors factors;
  double cost = 0.0;
  ConvergenceTrace trace;
};

/// Minimizes the energy cost over energy-mode factors.
SolveResult minimize_energy(const QuadraticHamiltonian& h,
                            TriangularFactors init,
                            const OptimizerConfig& cfg);

/// Minimizes the k-pair partial cost over gap- or partial-mode factors.
SolveResult minimize_partial(const QuadraticHamiltonian& h,
                             TriangularFactors init,
                             const OptimizerConfig& cfg);

// ---------------------------------------------------------------------------
// Starting points
// ---------------------------------------------------------------------------

/// All factors zero (L3 = I, gamma = I).
TriangularFactors init_zero(const QuadraticHamiltonian& h, FactorMode mode,
                            Index k = 0);

/// Correlated start: M1 = V - diag(V), M2 = M3 = 0, so gamma carries the
/// off-diagonal couplings of the position block in its x-p sector.  For a
/// QDO lattice M1 is exactly rho^{-3} T.  Gap mode keeps the first row.
TriangularFactors init_gamma_t(const QuadraticHamiltonian& h, FactorMode mode,
                               Index k = 0);

/// Seeded Gaussian start on the M1 block (M2 = M3 = 0).  The default for
/// gap and partial runs: deterministic given the seed, and generically
/// coupled to every invariant subspace of H.  Structured lattices can make
/// row-based starting points orthogonal to the subspace carrying the
/// smallest symplectic eigenvalue, in which case gradient flow stays
/// trapped there; a generic start has no such blind spot.
TriangularFactors init_random(const QuadraticHamiltonian& h, FactorMode mode,
                              Index k = 0, std::uint64_t seed = 0,
                              double scale = 0.1);

/// Factors reloaded from a saved run, checked against the target problem
/// (dimension and mode must match).
TriangularFactors warm_start_factors(const std::string& dir,
                                     const QuadraticHamiltonian& h,
                                     FactorMode mode, Index k = 0);

}  // namespace sympopt
