#pragma once

#include "mihs/flops.hpp"
#include "mihs/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mihs {

// Tagged kind; only OSNAP carries a parameter (s nonzeros per column).
struct SketchKind {
  enum class Tag { CountSketch, Osnap, Srht, Gaussian };
  Tag tag = Tag::Gaussian;
  Index osnap_s = 1;

  static SketchKind count_sketch() { return {Tag::CountSketch, 1}; }
  static SketchKind osnap(Index s) { return {Tag::Osnap, s}; }
  static SketchKind srht() { return {Tag::Srht, 1}; }
  static SketchKind gaussian() { return {Tag::Gaussian, 1}; }
};

std::string to_string(SketchKind kind);

// A materialized random embedding S in R^{m x n}. Immutable after build;
// (kind, n, m, seed) regenerate it exactly.
struct SketchOperator {
  SketchKind kind;
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 0;

  // CountSketch: rows/signs hold one entry per source row (column of S).
  // OSNAP: s entries per source row, distinct within the row's block.
  std::vector<Index> rows;
  std::vector<double> signs;

  // SRHT: Rademacher signs (length n), m sampled rows of the padded
  // transform (without replacement), padded length (power of two).
  std::vector<double> srht_signs;
  std::vector<Index> srht_rows;
  Index srht_npad = 0;

  // Gaussian: dense entries, i.i.d. N(0, 1/m).
  Matrix gaussian;
};

// Deterministic build from (kind, n, m, seed).
// Errors: m = 0; Srht with m > n; Osnap with s < 1 or s > m.
SketchOperator build_sketch(SketchKind kind, Index n, Index m, std::uint64_t seed);

// S * M without forming S densely (except the Gaussian kind).
// Flop charges (to the sketch-build category):
//   CountSketch 2*n*d; OSNAP 2*s*n*d; Gaussian 2*m*n*d;
//   SRHT d*(n + npad*log2(npad) + m).
Matrix apply_sketch(const SketchOperator& S, const Matrix& M,
                    FlopCounter* fc = nullptr);
Vector apply_sketch(const SketchOperator& S, const Vector& v,
                    FlopCounter* fc = nullptr);

// Explicit m x n matrix form of S; test oracle and small-scale use only.
Matrix sketch_dense(const SketchOperator& S);

// Sketch-size rules, ceil(c * formula), clamped >= 1:
//   CountSketch: sd^2/(eps^2*delta)
//   Osnap:       alpha*sd*ln(sd/delta)/eps^2   (alpha = e by default)
//   Srht:        (sd + ln(1/(eps*delta))*ln(sd/delta))/eps^2
//   Gaussian:    sd/eps^2
// eps in (0,1), delta in (0,1/2], sd >= 1, c > 0.
Index recommended_sketch_size(SketchKind kind, double sd, double eps,
                              double delta, double c = 1.0,
                              double osnap_alpha = 2.718281828459045);

// In-place unnormalized Walsh-Hadamard transform; len must be a power of two.
void fwht_inplace(double* data, Index len);

} // namespace mihs
