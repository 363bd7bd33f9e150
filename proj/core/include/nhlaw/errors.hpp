#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhlaw {

enum class ErrorCode {
  NoValidRoot,
  DivergedContinuation,
  SingularM,
  QuadratureFailure,
  EigenSolverFailure,
  IndexOutOfRange,
  SvdFailure,
  ZeroEta,
  MismatchedSource,
  DegenerateEigenvectors,
  SingularStability,
  CrossedZero,
  NoBracket,
  ShootingFailure,
  InsufficientPairs,
  InvalidConfig,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nhlaw
