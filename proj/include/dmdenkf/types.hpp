#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dmdenkf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Raised when input data is structurally unusable (bad file, malformed row,
// inconsistent dimensions in a series).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a computation fails numerically (singular solve, non-PSD
// covariance, filter divergence).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dmdenkf
