#include "reflkit/error.hpp"

namespace reflkit {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::UnsupportedOrder: return "unsupported-order";
    case ErrorCode::Unclassifiable: return "unclassifiable";
    case ErrorCode::Stiffness: return "stiffness";
    case ErrorCode::NearSingularAlpha: return "near-singular-alpha";
    case ErrorCode::Pole: return "pole";
    case ErrorCode::ConvergenceFailure: return "convergence-failure";
    case ErrorCode::IntegrationFailure: return "integration-failure";
    case ErrorCode::RequiresEpsilonShift: return "requires-epsilon-shift";
    case ErrorCode::NearEigenvalue: return "near-eigenvalue";
    case ErrorCode::DivergentCoefficient: return "divergent-coefficient";
    case ErrorCode::MeanFreeViolation: return "mean-free-violation";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace reflkit
