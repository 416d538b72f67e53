#include "qkdmm/errors.hpp"

namespace qkdmm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidEfficiency: return "InvalidEfficiency";
    case ErrorCode::SingularDetector: return "SingularDetector";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SolverBudgetExceeded: return "SolverBudgetExceeded";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidGate: return "InvalidGate";
    case ErrorCode::CoverageError: return "CoverageError";
    case ErrorCode::NonPhysical: return "NonPhysical";
    case ErrorCode::DegenerateScenario: return "DegenerateScenario";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace qkdmm
