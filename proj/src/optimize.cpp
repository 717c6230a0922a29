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

#include "sympopt/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "sympopt/io.hpp"

namespace sympopt {

namespace {

using Clock = std::chrono::steady_clock;

struct Evaluator {
  const CostGradFn& fn;
  ConvergenceTrace& trace;
  Clock::time_point t0;
  long calls = 0;

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double v = fn(x, g);
    ++calls;
    const double gn = g.lpNorm<Eigen::Infinity>();
    const double elapsed =
        std::chrono::duration<double>(Clock::now() - t0).count();
    trace.records.push_back({calls, v, gn, elapsed});
    if (!std::isfinite(v) || !g.allFinite())
      throw NumericalFailure("minimize: non-finite cost or gradient at step " +
                             std::to_string(calls));
    return v;
  }
};

// Minimizer of the cubic Hermite model through (0, f0, s0) and (a, fa, sa),
// falling back to the quadratic model through (f0, s0, fa) when the cubic
// is degenerate.  Exact for quadratic costs; that exactness is what makes
// conjugate gradients finite on them.
double interp_step(double f0, double s0, double a, double fa, double sa) {
  const double d1 = s0 + sa + 3.0 * (f0 - fa) / a;
  const double disc = d1 * d1 - s0 * sa;
  if (disc >= 0.0) {
    const double d2 = std::sqrt(disc);
    const double denom = sa - s0 + 2.0 * d2;
    if (denom != 0.0) {
      const double cand = a - a * (sa + d2 - d1) / denom;
      if (std::isfinite(cand)) return cand;
    }
  }
  const double denom = 2.0 * (fa - f0 - s0 * a);
  if (denom != 0.0) {
    const double cand = -s0 * a * a / denom;
    if (std::isfinite(cand)) return cand;
  }
  return 0.5 * a;
}

MinimizeResult run_cg(const CostGradFn& fn, Eigen::VectorXd x,
                      const OptimizerConfig& cfg) {
  MinimizeResult out;
  Evaluator eval{fn, out.trace, Clock::now()};
  const auto& ls = cfg.line_search;

  Eigen::VectorXd g(x.size());
  double f = eval(x, g);
  out.trace.accepted.push_back(eval.calls);
  out.x = x;
  out.cost = f;

  Eigen::VectorXd dir = -g;
  double alpha_prev = 0.0;
  double slope_prev = 0.0;
  long last_improvement = 0;  // accepted-iteration index of last real decrease

  while (true) {
    if (g.lpNorm<Eigen::Infinity>() <= cfg.tol) {
      out.trace.status = OptStatus::converged;
      break;
    }
    if (eval.calls >= cfg.max_steps) {
      out.trace.status = OptStatus::step_cap;
      break;
    }
    // A tolerance below the double-precision floor of the cost cannot be
    // met; once a run of accepted steps yields no resolvable decrease the
    // search has nothing left to act on, which is reported the same way as
    // an exhausted line search: best-so-far with the status flagged.
    if (out.trace.iterations - last_improvement >= 15) {
      out.trace.status = OptStatus::line_search_failure;
      break;
    }

    double slope = g.dot(dir);
    if (!(slope < 0.0)) {  // not a descent direction: restart on steepest
      dir = -g;
      slope = -g.squaredNorm();
      if (!(slope < 0.0)) {
        out.trace.status = OptStatus::converged;
        break;
      }
    }

    // First trial step: carry the previous first-order decrease forward,
    // so well-scaled problems accept immediately.  Clamped relative to the
    // last accepted step so a direction restart cannot fling the trial off.
    double alpha;
    if (alpha_prev > 0.0 && slope < 0.0) {
      alpha = alpha_prev * (slope_prev / slope);
      alpha = std::clamp(alpha, 0.01 * alpha_prev, 100.0 * alpha_prev);
    } else {
      alpha = std::min(1.0, 1.0 / std::max(1e-12, g.lpNorm<Eigen::Infinity>()));
    }
    alpha = std::clamp(alpha, 1e-16, 1e10);

    // Strong-Wolfe search.  Every probe evaluates value and gradient, so
    // both conditions are checked at no extra cost and the accepted
    // gradient is reused for the next direction.
    bool accepted = false;
    double accepted_alpha = 0.0;
    double best_probe_f = std::numeric_limits<double>::infinity();
    double best_probe_a = 0.0;
    Eigen::VectorXd xp(x.size());
    Eigen::VectorXd gp(x.size());
    double fp = 0.0;
    for (int probe = 0; probe < ls.max_probes && eval.calls < cfg.max_steps;
         ++probe) {
      xp = x + alpha * dir;
      fp = eval(xp, gp);
      const double sp = gp.dot(dir);
      if (fp < best_probe_f) {
        best_probe_f = fp;
        best_probe_a = alpha;
      }
      const bool armijo = fp <= f + ls.c1 * alpha * slope;
      const bool curvature = std::abs(sp) <= ls.c2 * std::abs(slope);
      // Near the floating-point floor of the cost the Armijo test cannot
      // resolve real progress; a flat value together with a near-zero
      // directional slope is accepted instead (approximate Wolfe).
      const bool flat = fp <= f + 1e-12 * std::max(1.0, std::abs(f));
      // After a few failed probes settle for sufficient decrease alone.
      if ((armijo && (curvature || probe >= 3)) || (flat && curvature)) {
        accepted = true;
        accepted_alpha = alpha;
        break;
      }
      double next = interp_step(f, slope, alpha, fp, sp);
      if (!armijo) {
        next = std::clamp(next, 0.05 * alpha, 0.9 * alpha);
      } else if (sp < 0.0) {
        // Decrease is fine but still descending: the minimum lies beyond.
        next = std::clamp(next, 1.1 * alpha, 10.0 * alpha);
      } else {
        next = std::clamp(next, 0.05 * alpha, 0.99 * alpha);
      }
      alpha = next;
    }

    if (!accepted) {
      out.trace.status = eval.calls >= cfg.max_steps
                             ? OptStatus::step_cap
                             : OptStatus::line_search_failure;
      if (best_probe_f < out.cost) {
        out.x = x + best_probe_a * dir;
        out.cost = best_probe_f;
      }
      break;
    }

    // Polak-Ribiere coefficient from the old and new gradients; the
    // max(0, .) clamp doubles as an automatic restart.
    const double gg = g.squaredNorm();
    double beta = gp.dot(gp - g) / gg;
    beta = std::max(0.0, beta);

    x.swap(xp);
    g.swap(gp);
    f = fp;
    alpha_prev = accepted_alpha;
    slope_prev = slope;
    dir = -g + beta * dir;

    out.trace.accepted.push_back(eval.calls);
    ++out.trace.iterations;
    if (f < out.cost - 1e-13 * std::max(1.0, std::abs(out.cost))) {
      last_improvement = out.trace.iterations;
    }
    if (f < out.cost) {
      out.cost = f;
      out.x = x;
    }
  }

  return out;
}

MinimizeResult run_gd(const CostGradFn& fn, Eigen::VectorXd x,
                      const OptimizerConfig& cfg,
                      const Eigen::VectorXd& step_scale) {
  MinimizeResult out;
  Evaluator eval{fn, out.trace, Clock::now()};
  const bool scaled = step_scale.size() > 0;
  if (scaled && step_scale.size() != x.size())
    throw InvalidInput("minimize: step_scale length differs from parameters");

  Eigen::VectorXd g(x.size());
  double f = eval(x, g);
  out.trace.accepted.push_back(eval.calls);
  out.x = x;
  out.cost = f;

  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  while (g.lpNorm<Eigen::Infinity>() > cfg.tol && eval.calls < cfg.max_steps) {
    v = cfg.momentum * v -
        cfg.learning_rate * (scaled ? step_scale.cwiseProduct(g).eval() : g);
    x += v;
    f = eval(x, g);
    out.trace.accepted.push_back(eval.calls);
    ++out.trace.iterations;
    if (f < out.cost) {
      out.cost = f;
      out.x = x;
    }
  }
  out.trace.status = g.lpNorm<Eigen::Infinity>() <= cfg.tol
                         ? OptStatus::converged
                         : OptStatus::step_cap;
  return out;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidInput("OptimizerConfig: tol must be > 0");
  if (max_steps < 1)
    throw InvalidInput("OptimizerConfig: max_steps must be >= 1");
  if (method == OptMethod::gd_momentum) {
    if (!(learning_rate > 0.0))
      throw InvalidInput("OptimizerConfig: learning rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw InvalidInput("OptimizerConfig: momentum must lie in [0, 1)");
  }
  if (!(line_search.c1 > 0.0 && line_search.c1 < line_search.c2 &&
        line_search.c2 < 1.0))
    throw InvalidInput("OptimizerConfig: need 0 < c1 < c2 < 1");
  if (line_search.max_probes < 1)
    throw InvalidInput("OptimizerConfig: line search needs >= 1 probe");
}

MinimizeResult minimize(const CostGradFn& fn, Eigen::VectorXd init,
                        const OptimizerConfig& cfg,
                        const Eigen::VectorXd& step_scale) {
  cfg.validate();
  if (init.size() < 1) throw InvalidInput("minimize: empty parameter vector");
  return cfg.method == OptMethod::cg
             ? run_cg(fn, std::move(init), cfg)
             : run_gd(fn, std::move(init), cfg, step_scale);
}

SolveResult minimize_energy(const QuadraticHamiltonian& h,
                            TriangularFactors init,
                            const OptimizerConfig& cfg) {
  init.check_consistent();
  if (init.mode != FactorMode::energy)
    throw InvalidInput("minimize_energy: factors must be in energy mode");
  if (init.d != h.d) throw InvalidInput("minimize_energy: dimension mismatch");
  CostGradFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& grad) {
    TriangularFactors f = init;
    f.params = p;
    return energy_value_and_grad(f, h, grad);
  };
  // Fixed-rate descent steps the matrix entries, not the packed storage;
  // the documented learning-rate scale is only stable in that metric.
  const Eigen::VectorXd scale = cfg.method == OptMethod::gd_momentum
                                    ? matrix_gradient_scaling(init)
                                    : Eigen::VectorXd();
  MinimizeResult r = minimize(fn, init.params, cfg, scale);
  SolveResult out;
  out.factors = std::move(init);
  out.factors.params = std::move(r.x);
  out.cost = r.cost;
  out.trace = std::move(r.trace);
  return out;
}

SolveResult minimize_partial(const QuadraticHamiltonian& h,
                             TriangularFactors init,
                             const OptimizerConfig& cfg) {
  init.check_consistent();
  if (init.mode != FactorMode::gap && init.mode != FactorMode::partial)
    throw InvalidInput("minimize_partial: factors must be gap or partial mode");
  if (init.d != h.d) throw InvalidInput("minimize_partial: dimension mismatch");
  const Index k = init.k;
  CostGradFn fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& grad) {
    TriangularFactors f = init;
    f.params = p;
    return partial_value_and_grad(f, h, k, grad);
  };
  const Eigen::VectorXd scale = cfg.method == OptMethod::gd_momentum
                                    ? matrix_gradient_scaling(init)
                                    : Eigen::VectorXd();
  MinimizeResult r = minimize(fn, init.params, cfg, scale);
  SolveResult out;
  out.factors = std::move(init);
  out.factors.params = std::move(r.x);
  out.cost = r.cost;
  out.trace = std::move(r.trace);
  return out;
}

TriangularFactors init_zero(const QuadraticHamiltonian& h, FactorMode mode,
                            Index k) {
  return TriangularFactors::zeros(mode, h.d, k);
}

TriangularFactors init_gamma_t(const QuadraticHamiltonian& h, FactorMode mode,
                               Index k) {
  TriangularFactors f = TriangularFactors::zeros(mode, h.d, k);
  Eigen::MatrixXd m1 = h.v;
  m1.diagonal().setZero();
  if (mode == FactorMode::gap) {
    f.params.head(h.d) = m1.row(0).transpose();
  } else {
    f.params.head(packed_size(h.d)) = pack_symmetric(m1).coeffs;
  }
  return f;
}

TriangularFactors init_random(const QuadraticHamiltonian& h, FactorMode mode,
                              Index k, std::uint64_t seed, double scale) {
  if (!(scale > 0.0)) throw InvalidInput("init_random: scale must be > 0");
  TriangularFactors f = TriangularFactors::zeros(mode, h.d, k);
  std::mt19937_64 rng(seed);
  // Per-entry width scale/sqrt(d) keeps the size of the starting block
  // (vector 2-norm, matrix operator norm) independent of dimension, so one
  // scale works from d = 3 to d = 10^3+.
  std::normal_distribution<double> dist(0.0,
                                        scale / std::sqrt(double(h.d)));
  for (Index i = 0; i < f.m1_size(); ++i) f.params(i) = dist(rng);
  return f;
}

TriangularFactors warm_start_factors(const std::string& dir,
                                     const QuadraticHamiltonian& h,
                                     FactorMode mode, Index k) {
  LoadedFactors loaded = load_factors(dir);
  TriangularFactors& f = loaded.factors;
  if (f.d != h.d)
    throw InvalidInput("warm_start_factors: saved dimension " +
                       std::to_string(f.d) + " does not match problem " +
                       std::to_string(h.d));
  if (f.mode != mode)
    throw InvalidInput(
        "warm_start_factors: saved factors are a different mode");
  const Index want_k = mode == FactorMode::energy ? h.d
                       : mode == FactorMode::gap  ? 1
                                                  : k;
  if (f.k != want_k)
    throw InvalidInput("warm_start_factors: saved pair count k differs");
  return std::move(f);
}

}  // namespace sympopt
