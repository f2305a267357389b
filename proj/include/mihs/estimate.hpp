#pragma once

#include "mihs/flops.hpp"
#include "mihs/types.hpp"

#include <cstdint>
#include <vector>

namespace mihs {

struct SdEstimate {
  double value = 0.0;          // clamped to [0, d]
  double raw = 0.0;            // unclamped d - tau/T
  Index samples = 0;           // T
  std::vector<double> taus;    // per-probe lambda * <v, z>
  double eps_tr = 0.0;
};

// sum sigma_i^2 / (sigma_i^2 + lambda); for lambda = 0, the count of
// nonzero singular values.
double sd_exact(const Vector& sigma, double lambda);

// Hutchinson estimate of sd_lambda from the sketched matrix:
// T Rademacher probes v, z = aab_solve(SA, v, lambda, eps_tr),
// tau += lambda * <v, z>, estimate = d - tau/T. Requires lambda > 0, T >= 1.
// Probe l draws from child_seed(seed, l); deterministic under reordering.
SdEstimate hutchinson_sd(const Matrix& SA, double lambda, Index T,
                         double eps_tr, std::uint64_t seed,
                         FlopCounter* fc = nullptr);

// Clamp an estimate into [1, d] before deriving momentum from it
// (overestimates are safe, values below 1 or above d are not usable).
double clamp_sd_for_momentum(double sd, Index d);

} // namespace mihs
