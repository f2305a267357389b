#include "mihs/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mihs {

std::string to_string(SingularProfile::Tag tag) {
  switch (tag) {
    case SingularProfile::Tag::Geometric: return "geometric";
    case SingularProfile::Tag::PiecewisePhilipsLike: return "philips";
    case SingularProfile::Tag::PiecewiseHeatLike: return "heat";
    case SingularProfile::Tag::FromFile: return "from_file";
  }
  return "unknown";
}

Vector profile_singular_values(const SingularProfile& profile, Index r,
                               double kappa) {
  if (r < 1) throw std::invalid_argument("profile_singular_values: r must be >= 1");
  if (!(kappa >= 1.0))
    throw std::invalid_argument("profile_singular_values: kappa must be >= 1");
  Vector s(r);

  switch (profile.tag) {
    case SingularProfile::Tag::Geometric:
      for (Index i = 0; i < r; ++i)
        s[i] = r == 1 ? 1.0
                      : std::pow(kappa, -static_cast<double>(i) /
                                            static_cast<double>(r - 1));
      return s;

    case SingularProfile::Tag::PiecewisePhilipsLike: {
      const double lk = std::log(kappa);
      for (Index i = 0; i < r; ++i) {
        const double u =
            r == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(r - 1);
        const double w = u * u * (3.0 - 2.0 * u); // smoothstep
        s[i] = std::exp(-w * lk);
      }
      return s;
    }

    case SingularProfile::Tag::PiecewiseHeatLike: {
      if (r == 1) {
        s[0] = 1.0;
        return s;
      }
      const double q = std::log(kappa) / std::log(static_cast<double>(r));
      for (Index i = 0; i < r; ++i)
        s[i] = std::pow(static_cast<double>(i + 1), -q);
      return s;
    }

    case SingularProfile::Tag::FromFile: {
      const auto& v = profile.values;
      if (static_cast<Index>(v.size()) != r)
        throw std::invalid_argument(
            "profile_singular_values: from_file needs exactly r values");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0))
          throw std::invalid_argument(
              "profile_singular_values: from_file values must be > 0");
        if (i > 0 && v[i] > v[i - 1])
          throw std::invalid_argument(
              "profile_singular_values: from_file values must be non-increasing");
      }
      const double top = v.front(), bot = v.back();
      if (top == bot) {
        s.setOnes(); // flat spectrum: normalized as-is, kappa unreachable
        return s;
      }
      // Normalize to sigma_1 = 1, then raise to the power t that maps the
      // existing ratio onto kappa exactly (log-space rescale).
      const double t = std::log(kappa) / std::log(top / bot);
      for (Index i = 0; i < r; ++i)
        s[i] = std::pow(v[static_cast<std::size_t>(i)] / top, t);
      return s;
    }
  }
  throw std::logic_error("unknown singular profile tag");
}

Matrix correlated_gaussian_rows(Index n, Index d, RngState& rng) {
  if (n < 1 || d < 1)
    throw std::invalid_argument("correlated_gaussian_rows: need n,d >= 1");
  Matrix gamma(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      gamma(i, j) = 5.0 * std::pow(0.9, std::abs(static_cast<double>(i - j)));
  Eigen::LLT<Matrix> llt(gamma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("correlated_gaussian_rows: covariance Cholesky failed");
  Matrix L = llt.matrixL();

  Matrix G(n, d);
  for (Index i = 0; i < n; ++i) // row-by-row draw order pins determinism
    for (Index j = 0; j < d; ++j) G(i, j) = rng.normal();
  Matrix A0 = Matrix::Ones(n, d);
  A0.noalias() += G * L.transpose();
  return A0;
}

Problem generate_problem(Index n, Index d, const SingularProfile& profile,
                         double kappa, double noise_level, std::uint64_t seed,
                         XTrueKind x_kind) {
  if (n < 1 || d < 1) throw std::invalid_argument("generate_problem: need n,d >= 1");
  if (noise_level < 0.0)
    throw std::invalid_argument("generate_problem: noise_level must be >= 0");
  const Index r = std::min(n, d);
  RngState rng(seed);

  Matrix A0 = correlated_gaussian_rows(n, d, rng);
  CompactSVD svd = compact_svd(A0);
  svd.singular_values = profile_singular_values(profile, r, kappa);
  Matrix A = svd.U * svd.singular_values.asDiagonal() * svd.V.transpose();

  Vector x_true(d);
  if (x_kind == XTrueKind::Smooth) {
    constexpr double kPi = 3.14159265358979323846;
    for (Index i = 0; i < d; ++i) {
      const double t =
          d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
      x_true[i] = std::sin(2.0 * kPi * t) + 0.5 * std::sin(4.0 * kPi * t + 0.3);
    }
  } else {
    for (Index i = 0; i < d; ++i) x_true[i] = rng.uniform(-1.0, 1.0);
  }

  Vector y = A * x_true;
  Vector b = y;
  if (noise_level > 0.0) {
    Vector g(n);
    for (Index i = 0; i < n; ++i) g[i] = rng.normal();
    const double gn = g.norm(), yn = y.norm();
    if (gn > 0.0 && yn > 0.0) b += g * (noise_level * yn / gn);
  }

  Problem p;
  p.A = std::move(A);
  p.b = std::move(b);
  p.x_true = std::move(x_true);
  p.meta.profile = to_string(profile.tag);
  p.meta.kappa = kappa;
  p.meta.noise_level = noise_level;
  p.meta.seed = seed;
  p.meta.x_kind = x_kind == XTrueKind::Smooth ? "smooth" : "uniform";
  p.svd = std::move(svd);
  return p;
}

const CompactSVD& ensure_svd(Problem& problem) {
  if (!problem.svd) problem.svd = compact_svd(problem.A);
  return *problem.svd;
}

Vector ridge_solution(const CompactSVD& svd, const Vector& b, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("ridge_solution: lambda must be >= 0");
  Vector t = svd.U.transpose() * b;
  for (Index i = 0; i < t.size(); ++i) {
    const double s = svd.singular_values[i];
    const double denom = s * s + lambda;
    t[i] = denom > 0.0 ? t[i] * s / denom : 0.0; // zero sigma at lambda=0: pinv
  }
  return svd.V * t;
}

double optimal_lambda(Problem& problem) {
  if (!problem.x_true)
    throw std::invalid_argument("optimal_lambda: problem has no x_true");
  const CompactSVD& svd = ensure_svd(problem);
  const Vector& sig = svd.singular_values;
  const Index r = sig.size();

  double smax = 0.0, smin_pos = 0.0;
  for (Index i = 0; i < r; ++i) {
    if (sig[i] > 0.0) {
      smax = std::max(smax, sig[i]);
      smin_pos = smin_pos == 0.0 ? sig[i] : std::min(smin_pos, sig[i]);
    }
  }
  if (smax == 0.0) throw std::invalid_argument("optimal_lambda: A is zero");

  const Vector c = svd.U.transpose() * problem.b;
  const Vector vx = svd.V.transpose() * *problem.x_true;
  // || x(lambda) - x_true ||^2 up to the constant component of x_true
  // orthogonal to range(V), which does not move the argmin.
  auto err2 = [&](double ln_lambda) {
    const double lam = std::exp(ln_lambda);
    double acc = 0.0;
    for (Index i = 0; i < r; ++i) {
      const double s = sig[i];
      const double xi = s * c[i] / (s * s + lam);
      const double dlt = xi - vx[i];
      acc += dlt * dlt;
    }
    return acc;
  };

  double lo = std::log(smin_pos * smin_pos * 1e-3);
  double hi = std::log(smax * smax * 1e3);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = err2(x1), f2 = err2(x2);
  while (hi - lo > 1e-3) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = err2(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = err2(x2);
    }
  }
  return std::exp(0.5 * (lo + hi));
}

} // namespace mihs
