#include "mihs/solvers.hpp"

#include "mihs/rng.hpp"
#include "mihs/subsolver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <memory>
#include <stdexcept>

namespace mihs {

MomentumParams momentum_theoretical(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("momentum_theoretical: eps must be in (0,1)");
  const double sp = std::sqrt(1.0 + eps);
  const double sm = std::sqrt(1.0 - eps);
  const double beta = ((sp - sm) / (sp + sm)) * ((sp - sm) / (sp + sm));
  const double alpha = (1.0 - beta) * std::sqrt(1.0 - eps * eps);
  return {alpha, beta};
}

MomentumParams momentum_empirical(double sd, Index m) {
  if (!(sd > 0.0))
    throw std::invalid_argument("momentum_empirical: sd must be > 0");
  if (!(sd < static_cast<double>(m)))
    throw std::invalid_argument("momentum_empirical: sd must be < m (no contraction otherwise)");
  const double beta = sd / static_cast<double>(m);
  return {(1.0 - beta) * (1.0 - beta), beta};
}

Index iteration_bound(double eta, double eps, double C, IterationBoundMode mode) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("iteration_bound: eta must be in (0,1)");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("iteration_bound: eps must be in (0,1/2)");
  if (!(C >= 1.0))
    throw std::invalid_argument("iteration_bound: C must be >= 1");
  const double rate = eps / (1.0 + std::sqrt(1.0 - eps * eps));
  const double ln_rate = std::log(rate);
  double raw = 0.0;
  if (mode == IterationBoundMode::Quotient)
    raw = (std::log(eta) - std::log(C)) / ln_rate;
  else
    raw = (std::log(eta) * std::log(C)) / ln_rate;
  const double v = std::ceil(raw);
  return v < 1.0 ? Index{1} : static_cast<Index>(v);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + k, v.end());
  double hi = v[k];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + k - 1, v.begin() + k);
    return 0.5 * (v[k - 1] + hi);
  }
  return hi;
}

// Median consecutive-error ratio over the final third of the outer records.
double rate_estimate(const std::vector<IterRecord>& records) {
  std::vector<double> errs;
  for (const auto& r : records) {
    if (r.inner != 0) continue;
    const double e = r.rel_error >= 0.0 ? r.rel_error : r.residual;
    errs.push_back(e);
  }
  if (errs.size() < 3) return 0.0;
  std::vector<double> ratios;
  const std::size_t start = errs.size() - errs.size() / 3 - 1;
  for (std::size_t i = start; i + 1 < errs.size(); ++i) {
    if (errs[i] > 0.0 && std::isfinite(errs[i]) && std::isfinite(errs[i + 1]) &&
        errs[i + 1] > 0.0)
      ratios.push_back(errs[i + 1] / errs[i]);
  }
  return median_of(std::move(ratios));
}

MomentumParams resolve_momentum(const SolverConfig& cfg, Index m_level) {
  switch (cfg.rule) {
    case MomentumRule::Fixed: return cfg.momentum;
    case MomentumRule::Theoretical: return momentum_theoretical(cfg.rule_eps);
    case MomentumRule::Empirical: return momentum_empirical(cfg.rule_sd, m_level);
  }
  throw std::logic_error("unknown momentum rule");
}

std::uint64_t qr_flops(Index rows, Index cols) {
  const auto p = static_cast<std::uint64_t>(rows);
  const auto d = static_cast<std::uint64_t>(cols);
  return 2 * p * d * d - (2 * d * d * d) / 3;
}

// Cached R factor of [SA; sqrt(lambda) I]; solves (SA^T SA + lambda I) y = rhs.
struct ExactFactor {
  Matrix R;
  Index dim = 0;

  ExactFactor(const Matrix& SA, double lambda, FlopCounter* fc) {
    dim = SA.cols();
    Matrix P;
    if (lambda > 0.0) {
      P.resize(SA.rows() + dim, dim);
      P.topRows(SA.rows()) = SA;
      P.bottomRows(dim) = std::sqrt(lambda) * Matrix::Identity(dim, dim);
    } else {
      P = SA;
    }
    R = qr_r_factor(P);
    const double dmax = R.diagonal().cwiseAbs().maxCoeff();
    const double dmin = R.diagonal().cwiseAbs().minCoeff();
    if (lambda == 0.0 && (dmax == 0.0 || dmin <= 1e-12 * dmax))
      throw std::runtime_error(
          "exact sub-solve: sketched matrix is numerically singular; set lambda > 0");
    if (fc) fc->charge(FlopCategory::Subsolver, qr_flops(P.rows(), dim));
  }

  Vector solve(const Vector& rhs, FlopCounter* fc) const {
    Vector y = R.transpose().triangularView<Eigen::Lower>().solve(rhs);
    Vector out = R.triangularView<Eigen::Upper>().solve(y);
    // Two d x d triangular solves at d^2 flops each.
    if (fc) fc->charge(FlopCategory::Subsolver,
                       2 * static_cast<std::uint64_t>(dim) * dim);
    return out;
  }
};

void warn_shape(const char* which, bool ok) {
  if (!ok)
    std::cerr << "warning: " << which
              << " called outside its recommended row/column regime\n";
}

} // namespace

Vector exact_sub_solve(const Matrix& SA, const Vector& g, double lambda) {
  if (SA.rows() < 1) throw std::invalid_argument("exact_sub_solve: SA needs >= 1 row");
  if (g.size() != SA.cols())
    throw std::invalid_argument("exact_sub_solve: dimension mismatch");
  ExactFactor f(SA, lambda, nullptr);
  return f.solve(Vector(-g), nullptr);
}

SolveReport m_ihs(const Problem& problem, const SolverConfig& cfg, Scheme scheme,
                  const Vector* x_reference) {
  const Matrix& A = problem.A;
  const Vector& b = problem.b;
  const Index n = A.rows(), d = A.cols();
  const auto un = static_cast<std::uint64_t>(n);
  const auto ud = static_cast<std::uint64_t>(d);
  warn_shape("m_ihs", n >= d);
  if (cfg.x_init.size() != 0 && cfg.x_init.size() != d)
    throw std::invalid_argument("m_ihs: x_init has wrong length");

  SolveReport rep;
  FlopCounter& fc = rep.flops;
  const auto t0 = Clock::now();

  // m = 0 is the documented identity-sketch reference mode (SA = A).
  Matrix SA;
  if (cfg.m == 0) {
    SA = A;
  } else {
    SketchOperator S = build_sketch(cfg.sketch, n, cfg.m, cfg.seed);
    SA = apply_sketch(S, A, &fc);
  }

  const MomentumParams mom = resolve_momentum(cfg, cfg.m == 0 ? n : cfg.m);
  std::unique_ptr<ExactFactor> factor;
  if (scheme == Scheme::Exact)
    factor = std::make_unique<ExactFactor>(SA, cfg.lambda, &fc);

  Vector x = cfg.x_init.size() ? cfg.x_init : Vector::Zero(d);
  Vector xp = x;
  Vector g(d), tmp_n(n), dx(d);
  const double ref_norm = x_reference ? x_reference->norm() : 0.0;
  rep.records.reserve(static_cast<std::size_t>(cfg.outer_iters));

  for (Index i = 1; i <= cfg.outer_iters; ++i) {
    // g = A^T(b - Ax) - lambda*x; printed per-line cost 4nd + 3d.
    tmp_n.noalias() = A * x;
    tmp_n = b - tmp_n;
    g.noalias() = A.transpose() * tmp_n;
    g -= cfg.lambda * x;
    fc.charge(FlopCategory::Matvec, 4 * un * ud);
    fc.charge(FlopCategory::VectorOps, 3 * ud);
    if (i >= 2) rep.records[i - 2].residual = g.norm(); // diagnostic, uncharged

    Index sub_iters = 0;
    if (scheme == Scheme::Exact) {
      dx = factor->solve(g, &fc);
    } else {
      AabResult sub = aab_solve(SA, g, cfg.lambda, cfg.eps_sub, -1, &fc);
      dx = std::move(sub.x);
      sub_iters = sub.iters;
    }

    // x_{i+1} = x_i + alpha*dx + beta*(x_i - x_{i-1}); 5d.
    Vector xn = x + mom.alpha * dx + mom.beta * (x - xp);
    fc.charge(FlopCategory::VectorOps, 5 * ud);
    xp = std::move(x);
    x = std::move(xn);

    IterRecord rec;
    rec.outer = i;
    rec.rel_error = x_reference ? (x - *x_reference).norm() / ref_norm : -1.0;
    rec.cum_flops = fc.total();
    rec.wall_time_s = seconds_since(t0);
    rec.subsolver_iters = sub_iters;
    rep.records.push_back(std::move(rec));
  }

  if (!rep.records.empty()) {
    tmp_n.noalias() = A * x;
    tmp_n = b - tmp_n;
    g.noalias() = A.transpose() * tmp_n;
    g -= cfg.lambda * x;
    rep.records.back().residual = g.norm();
  }
  rep.x_final = std::move(x);
  rep.converged_rate_estimate = rate_estimate(rep.records);
  return rep;
}

SolveReport dual_m_ihs(const Problem& problem, const SolverConfig& cfg,
                       Scheme scheme, const Vector* x_reference) {
  const Matrix& A = problem.A;
  const Vector& b = problem.b;
  const Index n = A.rows(), d = A.cols();
  const auto un = static_cast<std::uint64_t>(n);
  const auto ud = static_cast<std::uint64_t>(d);
  warn_shape("dual_m_ihs", n <= d);
  if (!(cfg.lambda > 0.0))
    throw std::invalid_argument("dual_m_ihs: lambda must be > 0 (dual recovery divides by it)");

  SolveReport rep;
  FlopCounter& fc = rep.flops;
  const auto t0 = Clock::now();

  Matrix At = A.transpose();
  Matrix SAt;
  if (cfg.m == 0) {
    SAt = At;
  } else {
    SketchOperator S = build_sketch(cfg.sketch, d, cfg.m, cfg.seed);
    SAt = apply_sketch(S, At, &fc);
  }

  const MomentumParams mom = resolve_momentum(cfg, cfg.m == 0 ? d : cfg.m);
  std::unique_ptr<ExactFactor> factor;
  if (scheme == Scheme::Exact)
    factor = std::make_unique<ExactFactor>(SAt, cfg.lambda, &fc);

  Vector nu = Vector::Zero(n);
  Vector nup = nu;
  Vector g(n), tmp_d(d);
  const double ref_norm = x_reference ? x_reference->norm() : 0.0;
  rep.records.reserve(static_cast<std::size_t>(cfg.outer_iters));

  for (Index i = 1; i <= cfg.outer_iters; ++i) {
    // g = b - A A^T nu - lambda*nu; printed cost 4nd + 3n.
    tmp_d.noalias() = At * nu;
    g.noalias() = A * tmp_d;
    g = b - g - cfg.lambda * nu;
    fc.charge(FlopCategory::Matvec, 4 * un * ud);
    fc.charge(FlopCategory::VectorOps, 3 * un);
    if (i >= 2) rep.records[i - 2].residual = g.norm();

    Index sub_iters = 0;
    Vector dnu;
    if (scheme == Scheme::Exact) {
      dnu = factor->solve(g, &fc);
    } else {
      AabResult sub = aab_solve(SAt, g, cfg.lambda, cfg.eps_sub, -1, &fc);
      dnu = std::move(sub.x);
      sub_iters = sub.iters;
    }

    Vector nun = nu + mom.alpha * dnu + mom.beta * (nu - nup);
    fc.charge(FlopCategory::VectorOps, 5 * un);
    nup = std::move(nu);
    nu = std::move(nun);

    IterRecord rec;
    rec.outer = i;
    if (x_reference) {
      Vector xi = At * nu; // diagnostic recovery, uncharged
      rec.rel_error = (xi - *x_reference).norm() / ref_norm;
    }
    rec.cum_flops = fc.total();
    rec.wall_time_s = seconds_since(t0);
    rec.subsolver_iters = sub_iters;
    rep.records.push_back(std::move(rec));
  }

  if (!rep.records.empty()) {
    tmp_d.noalias() = At * nu;
    g.noalias() = A * tmp_d;
    g = b - g - cfg.lambda * nu;
    rep.records.back().residual = g.norm();
  }

  // Recovery x = A^T nu; printed cost 2nd.
  rep.x_final.noalias() = At * nu;
  fc.charge(FlopCategory::Matvec, 2 * un * ud);
  if (!rep.records.empty()) rep.records.back().cum_flops = fc.total();
  rep.nu_final = std::move(nu);
  rep.converged_rate_estimate = rate_estimate(rep.records);
  return rep;
}

// Shared nested loop for both primal-dual variants. The outer variable y is
// nu (under-determined case) or x (over-determined case); each outer step
// solves its sub-problem in the level-1 sketch's dual via an inner momentum
// loop on z in R^{m1}, whose own sub-systems go to aab_solve on the level-2
// sketched matrix M2.
static SolveReport pd_run(const Problem& problem, const SolverConfig& cfg,
                          const Vector* x_reference, bool under) {
  const Matrix& A = problem.A;
  const Vector& b = problem.b;
  const Index n = A.rows(), d = A.cols();
  const auto un = static_cast<std::uint64_t>(n);
  const auto ud = static_cast<std::uint64_t>(d);
  if (!(cfg.lambda > 0.0))
    throw std::invalid_argument("pd_m_ihs: lambda must be > 0 (recovery divides by it)");
  warn_shape(under ? "pd_m_ihs_under" : "pd_m_ihs_over", under ? n <= d : n >= d);

  SolveReport rep;
  FlopCounter& fc = rep.flops;
  const auto t0 = Clock::now();

  // Level-1 sketch: of A^T (under) or A (over). Level-2 sketch: of the
  // transpose of the level-1 result, giving the m2 x m1 inner matrix.
  const Index outer_dim = under ? n : d; // dimension of the outer variable's system
  const auto uod = static_cast<std::uint64_t>(outer_dim);
  Matrix M1; // m1 x outer_dim
  Index m1 = cfg.m;
  if (m1 == 0) {
    M1 = under ? Matrix(A.transpose()) : A;
    m1 = M1.rows();
  } else {
    SketchOperator S1 =
        build_sketch(cfg.sketch, under ? d : n, m1, cfg.seed);
    M1 = under ? apply_sketch(S1, Matrix(A.transpose()), &fc)
               : apply_sketch(S1, A, &fc);
  }
  const auto um1 = static_cast<std::uint64_t>(m1);

  Matrix M1t = M1.transpose(); // outer_dim x m1, reused by products below
  Matrix M2;                   // m2 x m1
  Index m2 = cfg.m2;
  if (m2 == 0) {
    M2 = M1t; // S2 = identity: the inner system keeps the exact level-1 Gram
    m2 = M2.rows();
  } else {
    SketchOperator S2 =
        build_sketch(cfg.sketch, outer_dim, m2, child_seed(cfg.seed, 1));
    M2 = apply_sketch(S2, M1t, &fc);
  }

  const MomentumParams momo = resolve_momentum(cfg, m1);
  const MomentumParams momi = resolve_momentum(cfg, m2);

  Vector y = Vector::Zero(outer_dim); // nu (under) or x (over)
  Vector yp = y;
  Vector z = Vector::Zero(m1);
  Vector b_out(outer_dim), gin(m1), tmp_o(outer_dim), tmp_n(n);
  const double ref_norm = x_reference ? x_reference->norm() : 0.0;
  const Index N = cfg.outer_iters, M = cfg.inner_iters;
  rep.records.reserve(static_cast<std::size_t>(N * (M + 1)));
  std::vector<std::size_t> outer_record_idx;

  for (Index i = 1; i <= N; ++i) {
    // Outer gradient b_out at the current outer iterate; 4nd + 3*outer_dim.
    if (under) {
      tmp_o.noalias() = A * Vector(A.transpose() * y);
      b_out = b - tmp_o - cfg.lambda * y;
    } else {
      tmp_n.noalias() = A * y;
      tmp_n = b - tmp_n;
      b_out.noalias() = A.transpose() * tmp_n;
      b_out -= cfg.lambda * y;
    }
    fc.charge(FlopCategory::Matvec, 4 * un * ud);
    fc.charge(FlopCategory::VectorOps, 3 * uod);
    // b_out is the outer gradient at the current iterate, i.e. at the iterate
    // the previous outer record refers to.
    if (!outer_record_idx.empty())
      rep.records[outer_record_idx.back()].residual = b_out.norm();

    // Inner momentum loop on z with warm start; momentum bootstraps fresh.
    Vector zp = z;
    double g_first = 0.0;
    for (Index j = 1; j <= M; ++j) {
      // gin = M1 (b_out - M1^T z) - lambda z; printed 4*odim*m1 + 3*m1.
      tmp_o.noalias() = M1t * z;
      tmp_o = b_out - tmp_o;
      gin.noalias() = M1 * tmp_o;
      gin -= cfg.lambda * z;
      fc.charge(FlopCategory::Matvec, 4 * uod * um1);
      fc.charge(FlopCategory::VectorOps, 3 * um1);

      const double gnorm = gin.norm(); // control diagnostic, uncharged
      if (j == 1) g_first = gnorm;
      if (j == M && g_first > 0.0 && gnorm > 10.0 * g_first) {
        rep.aborted = true;
        rep.abort_reason = "inner loop divergence: gradient grew >10x over " +
                           std::to_string(M) + " inner steps at outer " +
                           std::to_string(i);
        break;
      }

      AabResult sub = aab_solve(M2, gin, cfg.lambda, cfg.eps_sub, -1, &fc);
      Vector zn = z + momi.alpha * sub.x + momi.beta * (z - zp);
      fc.charge(FlopCategory::VectorOps, 5 * um1);
      zp = std::move(z);
      z = std::move(zn);

      IterRecord rec;
      rec.outer = i;
      rec.inner = j;
      rec.residual = gnorm; // inner gradient before this z-update
      rec.cum_flops = fc.total();
      rec.wall_time_s = seconds_since(t0);
      rec.subsolver_iters = sub.iters;
      rep.records.push_back(std::move(rec));
    }
    if (rep.aborted) break;

    // Recovery step: delta = (b_out - M1^T z)/lambda; printed 2*odim*m1 + 2*odim.
    tmp_o.noalias() = M1t * z;
    Vector delta = (b_out - tmp_o) / cfg.lambda;
    fc.charge(FlopCategory::Matvec, 2 * uod * um1);
    fc.charge(FlopCategory::VectorOps, 2 * uod);

    Vector yn = y + momo.alpha * delta + momo.beta * (y - yp);
    fc.charge(FlopCategory::VectorOps, 5 * uod);
    yp = std::move(y);
    y = std::move(yn);

    IterRecord rec;
    rec.outer = i;
    rec.inner = 0;
    if (x_reference) {
      if (under) {
        Vector xi = A.transpose() * y; // diagnostic, uncharged
        rec.rel_error = (xi - *x_reference).norm() / ref_norm;
      } else {
        rec.rel_error = (y - *x_reference).norm() / ref_norm;
      }
    }
    rec.cum_flops = fc.total();
    rec.wall_time_s = seconds_since(t0);
    outer_record_idx.push_back(rep.records.size());
    rep.records.push_back(std::move(rec));
  }

  // The final outer record's residual: outer gradient at the last iterate
  // (diagnostic, uncharged).
  if (!rep.aborted && !outer_record_idx.empty()) {
    Vector gfin(outer_dim);
    if (under) {
      gfin = b - A * Vector(A.transpose() * y) - cfg.lambda * y;
    } else {
      Vector r = b - A * y;
      gfin.noalias() = A.transpose() * r;
      gfin -= cfg.lambda * y;
    }
    rep.records[outer_record_idx.back()].residual = gfin.norm();
  }

  if (under) {
    rep.x_final.noalias() = A.transpose() * y;
    fc.charge(FlopCategory::Matvec, 2 * un * ud);
    rep.nu_final = std::move(y);
  } else {
    rep.x_final = std::move(y);
  }
  if (!rep.records.empty()) rep.records.back().cum_flops = fc.total();
  rep.converged_rate_estimate = rate_estimate(rep.records);
  return rep;
}

SolveReport pd_m_ihs_under(const Problem& problem, const SolverConfig& cfg,
                           const Vector* x_reference) {
  return pd_run(problem, cfg, x_reference, /*under=*/true);
}

SolveReport pd_m_ihs_over(const Problem& problem, const SolverConfig& cfg,
                          const Vector* x_reference) {
  return pd_run(problem, cfg, x_reference, /*under=*/false);
}

SolveReport baseline_lsqr(const Problem& problem, Index max_iter, double tol,
                          const Vector* x_reference) {
  const Matrix& A = problem.A;
  const Vector& b = problem.b;
  const Index n = A.rows(), d = A.cols();
  const auto un = static_cast<std::uint64_t>(n);
  const auto ud = static_cast<std::uint64_t>(d);
  const double lambda = problem.lambda;
  const double damp = std::sqrt(lambda);

  SolveReport rep;
  FlopCounter& fc = rep.flops;
  const auto t0 = Clock::now();
  const double ref_norm = x_reference ? x_reference->norm() : 0.0;

  Vector x = Vector::Zero(d);
  double beta = b.norm();
  fc.charge(FlopCategory::InnerProducts, 2 * un);
  fc.count_reduction();
  if (beta == 0.0) {
    rep.x_final = std::move(x);
    return rep;
  }
  Vector u = b / beta;
  Vector v(d);
  v.noalias() = A.transpose() * u;
  double alpha = v.norm();
  fc.charge(FlopCategory::Matvec, 2 * un * ud);
  fc.charge(FlopCategory::InnerProducts, 2 * ud);
  fc.charge(FlopCategory::VectorOps, un + ud);
  fc.count_reduction();
  if (alpha == 0.0) {
    rep.x_final = std::move(x);
    return rep;
  }
  v /= alpha;
  Vector w = v;
  double phibar = beta;
  double rhobar = alpha;
  const double grad0 = alpha * beta; // ||A^T b||

  for (Index k = 1; k <= max_iter; ++k) {
    u = A * v - alpha * u;
    beta = u.norm();
    fc.charge(FlopCategory::Matvec, 2 * un * ud);
    fc.charge(FlopCategory::VectorOps, 2 * un);
    fc.charge(FlopCategory::InnerProducts, 2 * un);
    fc.count_reduction();
    if (beta > 0.0) {
      u /= beta;
      fc.charge(FlopCategory::VectorOps, un);
    }
    v = A.transpose() * u - beta * v;
    alpha = v.norm();
    fc.charge(FlopCategory::Matvec, 2 * un * ud);
    fc.charge(FlopCategory::VectorOps, 2 * ud);
    fc.charge(FlopCategory::InnerProducts, 2 * ud);
    fc.count_reduction();
    if (alpha > 0.0) {
      v /= alpha;
      fc.charge(FlopCategory::VectorOps, ud);
    }

    // Fold the damping row, then the bidiagonal rotation (scalar work).
    double rhobar1 = rhobar, psi = 0.0;
    if (damp > 0.0) {
      rhobar1 = std::hypot(rhobar, damp);
      const double c1 = rhobar / rhobar1;
      psi = (damp / rhobar1) * phibar;
      phibar = c1 * phibar;
    }
    const double rho = std::hypot(rhobar1, beta);
    const double c = rhobar1 / rho;
    const double s = beta / rho;
    const double theta = s * alpha;
    rhobar = -c * alpha;
    const double phi = c * phibar;
    phibar = s * phibar;
    (void)psi;

    x += (phi / rho) * w;
    w = v - (theta / rho) * w;
    fc.charge(FlopCategory::VectorOps, 4 * ud);

    // O(1) recurrence estimate of the augmented-gradient norm (the standard
    // LSQR stopping quantity); keeps the stop rule inside the flop model.
    const double grad_est = phibar * alpha * std::abs(c);

    IterRecord rec;
    rec.outer = k;
    if (x_reference) rec.rel_error = (x - *x_reference).norm() / ref_norm;
    {
      Vector r = b - A * x; // diagnostic, uncharged
      Vector g = A.transpose() * r - lambda * x;
      rec.residual = g.norm();
    }
    rec.cum_flops = fc.total();
    rec.wall_time_s = seconds_since(t0);
    rep.records.push_back(std::move(rec));

    if (grad_est <= tol * grad0) break;
  }

  rep.x_final = std::move(x);
  rep.converged_rate_estimate = rate_estimate(rep.records);
  return rep;
}

} // namespace mihs
