#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace lodreg {

// Error taxonomy maps onto the CLI exit codes:
//   SchemaError/ConfigError -> 1, DataError -> 2, NumericError -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct EstimationError : DataError {
  using DataError::DataError;
};

struct NumericError : Error {
  using Error::Error;
};

struct SingularityError : NumericError {
  using NumericError::NumericError;
};

// Carries the last iterate so callers can inspect how far the solver got.
struct ConvergenceError : NumericError {
  ConvergenceError(const std::string& what, Eigen::VectorXd iterate)
      : NumericError(what), last_iterate(std::move(iterate)) {}
  Eigen::VectorXd last_iterate;
};

}  // namespace lodreg
