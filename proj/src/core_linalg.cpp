#include "mihs/core_linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

namespace mihs {

GivensRotation givens(double a, double b) {
  if (a == 0.0 && b == 0.0) return {1.0, 0.0, 0.0};
  // Hypot form keeps c^2 + s^2 = 1 to full precision and makes r >= 0.
  const double r = std::hypot(a, b);
  return {a / r, b / r, r};
}

Matrix qr_r_factor(const Matrix& M) {
  const Index d = M.cols();
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix R = qr.matrixQR().topRows(d).template triangularView<Eigen::Upper>();
  // Householder R has arbitrary diagonal signs; flip rows so diag(R) >= 0.
  for (Index i = 0; i < d; ++i)
    if (R(i, i) < 0.0) R.row(i).tail(d - i) = -R.row(i).tail(d - i);
  return R;
}

CompactSVD compact_svd(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CompactSVD out;
  out.U = svd.matrixU();
  out.singular_values = svd.singularValues();
  out.V = svd.matrixV();
  return out;
}

} // namespace mihs
