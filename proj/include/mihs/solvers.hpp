#pragma once

#include "mihs/flops.hpp"
#include "mihs/problems.hpp"
#include "mihs/sketch.hpp"
#include "mihs/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mihs {

struct MomentumParams {
  double alpha = 1.0; // step size, in (0, 1]
  double beta = 0.0;  // momentum, in [0, 1)
};

// Momentum from an embedding-quality bound eps in (0,1):
//   beta = ((sqrt(1+eps) - sqrt(1-eps)) / (sqrt(1+eps) + sqrt(1-eps)))^2
//   alpha = (1 - beta) * sqrt(1 - eps^2)
// (beta equals (eps/(1+sqrt(1-eps^2)))^2; the two forms agree to rounding.)
MomentumParams momentum_theoretical(double eps);

// Momentum from the statistical dimension: beta = sd/m, alpha = (1-beta)^2.
// Requires 0 < sd < m; the implied contraction rate is sqrt(beta).
MomentumParams momentum_empirical(double sd, Index m);

enum class IterationBoundMode {
  // ceil((ln eta - ln C) / ln rate): the semi-norm form; default.
  Quotient,
  // ceil((ln eta * ln C) / ln rate): the printed product form.
  Literal,
};

// Iterations to reach relative accuracy eta at contraction rate
// rate = eps/(1+sqrt(1-eps^2)), with norm-equivalence constant C >= 1.
// Result clamped >= 1. eps in (0, 1/2), eta in (0, 1).
Index iteration_bound(double eta, double eps, double C,
                      IterationBoundMode mode = IterationBoundMode::Quotient);

enum class Scheme { Exact, Inexact };

enum class MomentumRule { Fixed, Theoretical, Empirical };

struct SolverConfig {
  SketchKind sketch = SketchKind::gaussian();
  Index m = 0;             // sketch size (level 1); 0 = identity sketch (reference mode)
  Index m2 = 0;            // second-level sketch size (primal-dual only); 0 = identity
  double lambda = 0.0;
  Index outer_iters = 30;  // N
  Index inner_iters = 1;   // M (primal-dual only)
  double eps_sub = 0.1;    // forcing term for inexact sub-solves
  MomentumRule rule = MomentumRule::Empirical;
  MomentumParams momentum;   // used when rule == Fixed
  double rule_eps = 0.5;     // used when rule == Theoretical
  double rule_sd = 0.0;      // used when rule == Empirical
  Vector x_init;             // empty => zero start
  std::uint64_t seed = 0;    // sketch seed(s); level 2 uses child_seed(seed, 1)
};

struct IterRecord {
  Index outer = 0;
  Index inner = 0;           // 0 for single-level solvers
  double rel_error = -1.0;   // vs reference solution; -1 when no reference
  double residual = 0.0;     // gradient norm at the recorded iterate
  std::uint64_t cum_flops = 0;
  double wall_time_s = 0.0;
  Index subsolver_iters = 0;
};

struct SolveReport {
  Vector x_final;
  Vector nu_final;           // dual/pd-under runs only
  std::vector<IterRecord> records;
  double converged_rate_estimate = 0.0; // median consecutive-error ratio, final third
  FlopCounter flops;
  bool aborted = false;
  std::string abort_reason;
};

// Primal M-IHS (n >= d): sketch A once, iterate
//   g = A^T(b - Ax) - lambda*x;  dx = subsolve(SA, g);  x += alpha*dx + beta*(x - x_prev).
// Exact scheme factors [SA; sqrt(lambda) I] once and reuses R; Inexact runs
// aab_solve(SA, g, lambda, eps_sub) each iteration.
SolveReport m_ihs(const Problem& problem, const SolverConfig& cfg, Scheme scheme,
                  const Vector* x_reference = nullptr);

// Dual M-IHS (n <= d): iterates nu in R^n on the dual system, sketching A^T;
// recovers x = A^T nu. Requires lambda > 0.
SolveReport dual_m_ihs(const Problem& problem, const SolverConfig& cfg,
                       Scheme scheme, const Vector* x_reference = nullptr);

// Primal-dual M-IHS, under-determined regime (n <= d): level-1 sketch of A^T,
// level-2 sketch of the level-1 result's transpose; inner momentum loop in
// R^{m1} with warm start, outer updates on nu. Requires lambda > 0.
SolveReport pd_m_ihs_under(const Problem& problem, const SolverConfig& cfg,
                           const Vector* x_reference = nullptr);

// Primal-dual M-IHS, over-determined regime (n >= d). Requires lambda > 0.
SolveReport pd_m_ihs_over(const Problem& problem, const SolverConfig& cfg,
                          const Vector* x_reference = nullptr);

// Solves ((SA)^T(SA) + lambda I) x = -g via the R factor of [SA; sqrt(lambda) I].
Vector exact_sub_solve(const Matrix& SA, const Vector& g, double lambda);

// Damped LSQR baseline with the same report shape as m_ihs.
SolveReport baseline_lsqr(const Problem& problem, Index max_iter, double tol,
                          const Vector* x_reference = nullptr);

} // namespace mihs
