#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gsx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Malformed input: bad shape, invalid file, violated precondition.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A computation failed numerically: bad pivot, divergence, non-finite value.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

}  // namespace gsx
