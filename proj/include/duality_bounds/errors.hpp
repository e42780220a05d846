#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace duality_bounds {

enum class ErrorCode {
  DimensionMismatch,
  NotHermitian,
  IndefiniteMatrix,
  PassivityViolation,
  InvalidPartition,
  InvalidDesign,
  SingularDesignOperator,
  EnumerationCap,
  NotBlockDiagonal,
  MultiplierOutsidePhiEps,
  LiftBracketFailure,
  BoundaryState,
  IterationLimit,
  CoercivityFailure,
  OutsideCompactSet,
  PreconditionViolation,
  RestoreFailure,
  InvalidInput,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library surfaces as this exception; the
/// code is stable and is what the CLI maps to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace duality_bounds
