#include "simpl/error.hpp"

namespace simpl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::BoundaryProximity: return "boundary proximity";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::LinearSolve: return "linear solve";
    case ErrorCode::Io: return "i/o";
    case ErrorCode::Config: return "config";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::vector<double> data)
    : std::runtime_error(message), code_(code), data_(std::move(data)) {}

void fail(ErrorCode code, const std::string& message, std::vector<double> data) {
  throw Error(code, message, std::move(data));
}

}  // namespace simpl
