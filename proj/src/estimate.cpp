#include "mihs/estimate.hpp"

#include "mihs/rng.hpp"
#include "mihs/subsolver.hpp"

#include <algorithm>
#include <stdexcept>

namespace mihs {

double sd_exact(const Vector& sigma, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("sd_exact: lambda must be >= 0");
  double acc = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    const double s2 = sigma[i] * sigma[i];
    if (s2 == 0.0) continue; // contributes 0 for any lambda >= 0
    acc += s2 / (s2 + lambda);
  }
  return acc;
}

SdEstimate hutchinson_sd(const Matrix& SA, double lambda, Index T, double eps_tr,
                         std::uint64_t seed, FlopCounter* fc) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("hutchinson_sd: lambda must be > 0 (the trace "
                                "identity divides by the regularized spectrum)");
  if (T < 1) throw std::invalid_argument("hutchinson_sd: need T >= 1 probes");
  const Index d = SA.cols();
  const auto ud = static_cast<std::uint64_t>(d);

  SdEstimate est;
  est.samples = T;
  est.eps_tr = eps_tr;
  est.taus.reserve(static_cast<std::size_t>(T));

  double tau_sum = 0.0;
  Vector v(d);
  for (Index l = 0; l < T; ++l) {
    RngState rng(child_seed(seed, static_cast<std::uint64_t>(l)));
    for (Index i = 0; i < d; ++i) v[i] = rng.rademacher();
    AabResult sub = aab_solve(SA, v, lambda, eps_tr, -1, fc);
    const double tau = lambda * v.dot(sub.x);
    if (fc) {
      fc->charge(FlopCategory::InnerProducts, 2 * ud);
      fc->count_reduction();
    }
    est.taus.push_back(tau);
    tau_sum += tau;
  }

  // sd = d - lambda * tr((SA^T SA + lambda I)^{-1}); the probe average
  // estimates the trace term. Clamp to the attainable range [0, d].
  est.raw = static_cast<double>(d) - tau_sum / static_cast<double>(T);
  est.value = std::clamp(est.raw, 0.0, static_cast<double>(d));
  return est;
}

double clamp_sd_for_momentum(double sd, Index d) {
  if (d < 1) throw std::invalid_argument("clamp_sd_for_momentum: d must be >= 1");
  return std::clamp(sd, 1.0, static_cast<double>(d));
}

} // namespace mihs
