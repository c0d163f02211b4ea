#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace apc {

// All storage is complex double; real instances carry zero imaginary parts.
using Scalar = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowVector = Eigen::RowVectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

using Index = Eigen::Index;

}  // namespace apc
