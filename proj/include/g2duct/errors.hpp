#pragma once

#include <stdexcept>
#include <string>

namespace g2duct {

struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompatibleBoundaryDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularTransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParameterMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParallelLinesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDifferencesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpaceMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace g2duct
