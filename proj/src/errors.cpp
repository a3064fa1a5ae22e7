#include "rgop/errors.hpp"

namespace rgop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RhoZeroNotOne: return "RhoZeroNotOne";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotCirculant: return "NotCirculant";
    case ErrorCode::HorizonTooShort: return "HorizonTooShort";
    case ErrorCode::HorizonTooLargeForSDP: return "HorizonTooLargeForSDP";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::BothZero: return "BothZero";
    case ErrorCode::InfeasibleConstraints: return "InfeasibleConstraints";
    case ErrorCode::ZeroVariancePath: return "ZeroVariancePath";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::InconsistentColumnCount: return "InconsistentColumnCount";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalFailure:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::InternalConsistency:
      return ErrorCategory::Numerical;
    case ErrorCode::IoError:
    case ErrorCode::MalformedRow:
    case ErrorCode::EmptyFile:
    case ErrorCode::InconsistentColumnCount:
      return ErrorCategory::InputOutput;
    default:
      return ErrorCategory::Validation;
  }
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::InputOutput: return 4;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace rgop
