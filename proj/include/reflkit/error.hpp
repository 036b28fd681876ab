#pragma once

#include <stdexcept>
#include <string>

namespace reflkit {

enum class ErrorCode {
  InvalidArgument = 1,
  OutOfRange,
  UnsupportedOrder,
  Unclassifiable,
  Stiffness,
  NearSingularAlpha,
  Pole,
  ConvergenceFailure,
  IntegrationFailure,
  RequiresEpsilonShift,
  NearEigenvalue,
  DivergentCoefficient,
  MeanFreeViolation,
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace reflkit
