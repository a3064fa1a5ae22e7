#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rgop {

enum class ErrorCode {
  // validation
  InvalidArgument,
  RhoZeroNotOne,
  SymmetryViolation,
  NotPositiveDefinite,
  NotSymmetric,
  NotCirculant,
  HorizonTooShort,
  HorizonTooLargeForSDP,
  DegenerateScale,
  DimensionMismatch,
  TooFewObservations,
  NonFiniteData,
  PreconditionViolated,
  BothZero,
  InfeasibleConstraints,
  ZeroVariancePath,
  // numerical
  NumericalFailure,
  ConvergenceFailure,
  InternalConsistency,
  // input/output
  IoError,
  MalformedRow,
  EmptyFile,
  InconsistentColumnCount,
};

enum class ErrorCategory { Validation, Numerical, InputOutput };

std::string_view to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

/// Process exit code for an error category: 2 validation, 3 numerical, 4 I/O.
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rgop
