#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qkdmm {

enum class ErrorCode {
  NotHermitian,
  NotPSD,
  NumericalFailure,
  DimensionMismatch,
  InvalidEfficiency,
  SingularDetector,
  ZeroDenominator,
  Infeasible,
  SolverBudgetExceeded,
  NonPositiveInput,
  DomainError,
  InvalidGate,
  CoverageError,
  NonPhysical,
  DegenerateScenario,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qkdmm
