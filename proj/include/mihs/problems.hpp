#pragma once

#include "mihs/core_linalg.hpp"
#include "mihs/rng.hpp"
#include "mihs/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mihs {

// Singular-value profile for synthetic problems. All parametric profiles are
// normalized to sigma_1 = 1 and sigma_r = 1/kappa exactly:
//   Geometric:           sigma_i = kappa^{-(i-1)/(r-1)}
//   PiecewisePhilipsLike: sigma_i = exp(-w(u) ln kappa), w = u^2(3-2u) smoothstep
//                        (slow initial decay, fast tail)
//   PiecewiseHeatLike:    sigma_i = i^{-q}, q = ln kappa / ln r (slower,
//                        near-algebraic decay)
//   FromFile: explicit values (sorted descending); rescaled in log-space to
//             hit kappa when the values are non-flat.
struct SingularProfile {
  enum class Tag { Geometric, PiecewisePhilipsLike, PiecewiseHeatLike, FromFile };
  Tag tag = Tag::Geometric;
  std::vector<double> values; // FromFile only

  static SingularProfile geometric() { return {Tag::Geometric, {}}; }
  static SingularProfile philips() { return {Tag::PiecewisePhilipsLike, {}}; }
  static SingularProfile heat() { return {Tag::PiecewiseHeatLike, {}}; }
  static SingularProfile from_file(std::vector<double> v) {
    return {Tag::FromFile, std::move(v)};
  }
};

std::string to_string(SingularProfile::Tag tag);

// Evaluate the profile: r descending values with ratio kappa (see above).
Vector profile_singular_values(const SingularProfile& profile, Index r, double kappa);

enum class XTrueKind { Smooth, Uniform };

struct ProblemMeta {
  std::string profile = "geometric";
  double kappa = 1.0;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::string x_kind = "smooth";
};

struct Problem {
  Matrix A;
  Vector b;
  std::optional<Vector> x_true;
  double lambda = 0.0; // carried metadata; solver configs hold the active value
  ProblemMeta meta;
  // Cached by generate_problem (construction already computes it); consumers
  // that load problems from files can fill it via ensure_svd().
  std::optional<CompactSVD> svd;
};

// Rows i.i.d. from N(1_d, Gamma), Gamma_ij = 5 * 0.9^|i-j|, via Cholesky.
Matrix correlated_gaussian_rows(Index n, Index d, RngState& rng);

// Build A by replacing the singular values of a correlated Gaussian sample
// with the requested profile, then b = A x_true + noise (noise scaled so that
// ||omega|| / ||A x_true|| equals noise_level exactly).
Problem generate_problem(Index n, Index d, const SingularProfile& profile,
                         double kappa, double noise_level, std::uint64_t seed,
                         XTrueKind x_kind = XTrueKind::Smooth);

// Compute (and cache) the SVD of problem.A if absent; returns the cache.
const CompactSVD& ensure_svd(Problem& problem);

// argmin over lambda > 0 of ||x(lambda) - x_true||_2, evaluated in the SVD
// basis; golden-section search on ln(lambda) over
// [ln(sigma_r^2 * 1e-3), ln(sigma_1^2 * 1e3)] to 1e-3 width.
double optimal_lambda(Problem& problem);

// Ridge solution x(lambda) from the SVD (dense oracle; test/bench scale).
// lambda = 0 yields the pseudoinverse solution.
Vector ridge_solution(const CompactSVD& svd, const Vector& b, double lambda);

} // namespace mihs
