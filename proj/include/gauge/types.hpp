#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>

namespace gauge {

using Real = double;
using Complex = std::complex<double>;

using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Thrown when a caller violates an operation contract (dimension
/// mismatches, out-of-range parameters, malformed inputs).
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown on unrecoverable numerical failures (NaN from an operator,
/// indefinite weight matrices, exhausted resampling budgets).
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw contract_error(msg);
}

}  // namespace gauge
