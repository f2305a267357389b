#pragma once

#include "mihs/types.hpp"

namespace mihs {

struct CompactSVD {
  Matrix U;               // n x r, orthonormal columns
  Vector singular_values; // length r = min(n,d), descending, >= 0
  Matrix V;               // d x r, orthonormal columns
};

struct GivensRotation {
  double c;
  double s;
  double r; // = c*a + s*b >= 0
};

// Plane rotation annihilating b: [c s; -s c] * [a; b] = [r; 0], r >= 0.
// Both inputs zero returns (c,s,r) = (1,0,0).
GivensRotation givens(double a, double b);

// Upper-triangular R (d x d) with M^T M = R^T R; diagonal made nonnegative.
// Rank deficiency shows up as (near-)zero diagonal entries, no exception.
Matrix qr_r_factor(const Matrix& M);

// Compact SVD with r = min(n,d) (zero singular values kept).
CompactSVD compact_svd(const Matrix& M);

} // namespace mihs
