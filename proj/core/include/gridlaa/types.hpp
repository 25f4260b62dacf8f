#pragma once

#include <Eigen/Dense>
#include <complex>

namespace gridlaa {

using Real = double;
using Complex = std::complex<double>;

using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

/// Index of a bus inside the canonical ordering (generators first, ascending
/// external id, then load buses ascending external id).
using BusIndex = int;

}  // namespace gridlaa
