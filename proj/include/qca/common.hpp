#pragma once
// Shared scalar/matrix aliases and the error taxonomy used across the library.
// Every error type maps to a fixed process exit code in the CLI:
//   validation_error -> 1, capacity_error -> 2, numerical_error -> 3, io_error -> 4

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qca {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Mat8 = Eigen::Matrix<cplx, 8, 8>;
using Mat16 = Eigen::Matrix<cplx, 16, 16>;

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qca
