#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace naa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bad or unusable input data: unreadable files, empty lexicons, shape
/// mismatches, non-finite values. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file was readable but its contents do not follow the expected layout.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// Inconsistent options (e.g. SGD hyperparameters passed to an EM run).
/// The CLI maps it to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace naa
