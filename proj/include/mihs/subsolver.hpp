#pragma once

#include "mihs/flops.hpp"
#include "mihs/types.hpp"

#include <vector>

namespace mihs {

// Snapshot of the bidiagonalization state after an x-update; recorded only
// when a trace sink is supplied (test instrumentation).
struct AabState {
  Vector v, p, d, x;
  double rho = 0, theta = 0, rhobar = 0, thetabar = 0, lambdabar_sq = 0;
  double c = 0, s = 0, phi = 0, theta1 = 0;
  Index iter = 0;
  // |phi*rhobar|/theta1: by the residual identity this equals the residual of
  // the PREVIOUS iterate (the recurrence estimate lags one x-update).
  double relres = 0;
};

struct AabResult {
  Vector x;
  Index iters = 0;     // number of x-updates (the setup step counts as 1)
  double relres = 0;   // exact recurrence certificate for the returned x
  bool breakdown = false;     // lambda = 0 Krylov exhaustion before tolerance
  bool hit_max_iter = false;  // stopped by the iteration cap, relres >= eps_sub
};

// Solves (A^T A + lambda I) x = b by Golub-Kahan upper bidiagonalization of A
// with the lambda shift folded in through Givens rotations. No basis storage,
// no reorthogonalization; the only global reductions are the two normalizers
// per iteration. Stops when the analytic residual estimate drops below
// eps_sub (relative to ||b||).
//
// The residual test is hoisted to the loop head: after computing
// theta_{k+1} = ||A^T p_k - rho_k v_k|| the quantity |phi_k * c_k * theta_{k+1}|
// equals ||(A^T A + lambda I) x_k - b|| exactly (residual identity), so the
// returned relres certifies the returned x and the final iteration skips its
// second matrix product.
//
// max_iter < 0 selects the default min(rows, cols), tightened to
// 2*ceil(sqrt(kappa_est)*ln(1/eps_sub)) when kappa_est > 0.
AabResult aab_solve(const Matrix& A, const Vector& b, double lambda,
                    double eps_sub, Index max_iter = -1,
                    FlopCounter* fc = nullptr, double kappa_est = 0.0,
                    std::vector<AabState>* trace = nullptr);

// Explicit ||(A^T A + lambda I) x - b|| / ||b|| (0 when b = 0); test oracle
// for the analytic recurrence.
double aab_residual_check(const Matrix& A, const Vector& b, double lambda,
                          const Vector& x);

} // namespace mihs
