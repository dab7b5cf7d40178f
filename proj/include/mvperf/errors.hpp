#pragma once

#include <stdexcept>
#include <string>

namespace mvperf {

// Error categories map 1:1 onto CLI exit codes (see tools/mvperf.cpp).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or unreadable/unwritable files.
struct IoError : Error {
  using Error::Error;
};

// Malformed file contents or invalid data values.
struct FormatError : Error {
  using Error::Error;
};

// Shape disagreements between datasets, weights and models.
struct DimensionError : Error {
  using Error::Error;
};

// Inner solver failed to certify optimality within its iteration cap.
struct SolverError : Error {
  double residual = 0.0;
  explicit SolverError(const std::string& msg, double resid = 0.0)
      : Error(msg), residual(resid) {}
};

}  // namespace mvperf
