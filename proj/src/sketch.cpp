#include "mihs/sketch.hpp"

#include "mihs/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mihs {

std::string to_string(SketchKind kind) {
  switch (kind.tag) {
    case SketchKind::Tag::CountSketch: return "countsketch";
    case SketchKind::Tag::Osnap: return "osnap(" + std::to_string(kind.osnap_s) + ")";
    case SketchKind::Tag::Srht: return "srht";
    case SketchKind::Tag::Gaussian: return "gaussian";
  }
  return "?";
}

namespace {

Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// First k entries of a random permutation of {0..n-1} (partial Fisher-Yates).
std::vector<Index> sample_without_replacement(Index n, Index k, RngState& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index t = 0; t < k; ++t) {
    const Index j = t + static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(n - t)));
    std::swap(pool[t], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

} // namespace

void fwht_inplace(double* a, Index n) {
  for (Index h = 1; h < n; h <<= 1) {
    for (Index i = 0; i < n; i += h << 1) {
      for (Index j = i; j < i + h; ++j) {
        const double x = a[j];
        const double y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
    }
  }
}

SketchOperator build_sketch(SketchKind kind, Index n, Index m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("build_sketch: m must be >= 1");
  if (n < 1) throw std::invalid_argument("build_sketch: n must be >= 1");

  SketchOperator S;
  S.kind = kind;
  S.m = m;
  S.n = n;
  S.seed = seed;
  RngState rng(seed);

  switch (kind.tag) {
    case SketchKind::Tag::CountSketch: {
      S.rows.resize(static_cast<std::size_t>(n));
      S.signs.resize(static_cast<std::size_t>(n));
      for (Index j = 0; j < n; ++j) {
        S.rows[j] = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(m)));
        S.signs[j] = rng.rademacher();
      }
      break;
    }
    case SketchKind::Tag::Osnap: {
      const Index s = kind.osnap_s;
      if (s < 1) throw std::invalid_argument("build_sketch: osnap s must be >= 1");
      if (s > m) throw std::invalid_argument("build_sketch: osnap s must be <= m");
      const double val = 1.0 / std::sqrt(static_cast<double>(s));
      S.rows.resize(static_cast<std::size_t>(n * s));
      S.signs.resize(static_cast<std::size_t>(n * s));
      for (Index j = 0; j < n; ++j) {
        auto picks = sample_without_replacement(m, s, rng);
        for (Index t = 0; t < s; ++t) {
          S.rows[j * s + t] = picks[t];
          S.signs[j * s + t] = rng.rademacher() * val;
        }
      }
      break;
    }
    case SketchKind::Tag::Srht: {
      if (m > n)
        throw std::invalid_argument("build_sketch: srht requires m <= n (row subsampling)");
      S.srht_npad = next_pow2(n);
      S.srht_signs.resize(static_cast<std::size_t>(n));
      for (Index j = 0; j < n; ++j) S.srht_signs[j] = rng.rademacher();
      S.srht_rows = sample_without_replacement(S.srht_npad, m, rng);
      break;
    }
    case SketchKind::Tag::Gaussian: {
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      S.gaussian.resize(m, n);
      // Column-major fill order; part of the determinism contract.
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) S.gaussian(i, j) = rng.normal() * scale;
      break;
    }
  }
  return S;
}

Matrix apply_sketch(const SketchOperator& S, const Matrix& M, FlopCounter* fc) {
  if (M.rows() != S.n)
    throw std::invalid_argument("apply_sketch: S.n != M.rows");
  const Index n = S.n, m = S.m, d = M.cols();
  Matrix out;

  switch (S.kind.tag) {
    case SketchKind::Tag::CountSketch: {
      out = Matrix::Zero(m, d);
      for (Index j = 0; j < n; ++j)
        out.row(S.rows[j]) += S.signs[j] * M.row(j);
      if (fc) fc->charge(FlopCategory::SketchBuild,
                         2ull * static_cast<std::uint64_t>(n) * d);
      break;
    }
    case SketchKind::Tag::Osnap: {
      const Index s = S.kind.osnap_s;
      out = Matrix::Zero(m, d);
      for (Index j = 0; j < n; ++j)
        for (Index t = 0; t < s; ++t)
          out.row(S.rows[j * s + t]) += S.signs[j * s + t] * M.row(j);
      if (fc) fc->charge(FlopCategory::SketchBuild,
                         2ull * static_cast<std::uint64_t>(s) * n * d);
      break;
    }
    case SketchKind::Tag::Srht: {
      const Index npad = S.srht_npad;
      const double scale = 1.0 / std::sqrt(static_cast<double>(m));
      out.resize(m, d);
      Vector buf(npad);
      Index log2n = 0;
      while ((Index{1} << log2n) < npad) ++log2n;
      for (Index col = 0; col < d; ++col) {
        buf.setZero();
        for (Index j = 0; j < n; ++j) buf[j] = S.srht_signs[j] * M(j, col);
        fwht_inplace(buf.data(), npad);
        for (Index i = 0; i < m; ++i) out(i, col) = scale * buf[S.srht_rows[i]];
      }
      if (fc) fc->charge(FlopCategory::SketchBuild,
                         static_cast<std::uint64_t>(d) *
                             (static_cast<std::uint64_t>(n) +
                              static_cast<std::uint64_t>(npad) * log2n +
                              static_cast<std::uint64_t>(m)));
      break;
    }
    case SketchKind::Tag::Gaussian: {
      out.noalias() = S.gaussian * M;
      if (fc) fc->charge(FlopCategory::SketchBuild,
                         2ull * static_cast<std::uint64_t>(m) * n * d);
      break;
    }
  }
  return out;
}

Vector apply_sketch(const SketchOperator& S, const Vector& v, FlopCounter* fc) {
  Matrix M = apply_sketch(S, Matrix(v), fc);
  return Vector(M.col(0));
}

Matrix sketch_dense(const SketchOperator& S) {
  switch (S.kind.tag) {
    case SketchKind::Tag::Gaussian:
      return S.gaussian;
    default: {
      Matrix D = apply_sketch(S, Matrix(Matrix::Identity(S.n, S.n)));
      return D;
    }
  }
}

Index recommended_sketch_size(SketchKind kind, double sd, double eps,
                              double delta, double c, double osnap_alpha) {
  if (!(sd >= 1.0)) throw std::invalid_argument("recommended_sketch_size: sd must be >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("recommended_sketch_size: eps must be in (0,1)");
  if (!(delta > 0.0 && delta <= 0.5))
    throw std::invalid_argument("recommended_sketch_size: delta must be in (0,1/2]");
  if (!(c > 0.0)) throw std::invalid_argument("recommended_sketch_size: c must be > 0");

  double f = 0.0;
  switch (kind.tag) {
    case SketchKind::Tag::CountSketch:
      f = sd * sd / (eps * eps * delta);
      break;
    case SketchKind::Tag::Osnap:
      f = osnap_alpha * sd * std::log(sd / delta) / (eps * eps);
      break;
    case SketchKind::Tag::Srht:
      f = (sd + std::log(1.0 / (eps * delta)) * std::log(sd / delta)) / (eps * eps);
      break;
    case SketchKind::Tag::Gaussian:
      f = sd / (eps * eps);
      break;
  }
  const double v = std::ceil(c * f);
  return v < 1.0 ? Index{1} : static_cast<Index>(v);
}

} // namespace mihs
