#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace simpl {

enum class ErrorCode {
  InvalidArgument = 1,
  BoundaryProximity,
  Infeasible,
  NonConvergence,
  LinearSolve,
  Io,
  Config,
  Internal,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception type used throughout the library. `data()` carries the numeric
/// diagnostics relevant to the failure (final residual, constraint violations).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<double> data = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  ErrorCode code_;
  std::vector<double> data_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message, std::vector<double> data = {});

}  // namespace simpl
