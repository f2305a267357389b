#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mihs {

// Dense storage is Eigen's column-major default: sketch application and
// normal-equation products sweep columns, so this is the cache-friendly order.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace mihs
