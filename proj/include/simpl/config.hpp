#pragma once

#include <iosfwd>
#include <string>

#include "simpl/optimizer.hpp"
#include "simpl/problems.hpp"

namespace simpl {

/// Everything a run needs: the problem, the optimizer, and where the
/// artifacts go.
struct RunConfig {
  ProblemConfig problem;
  OptOptions optimizer;
  std::string output_dir = "simpl_out";
  int snapshot_period = 0;  // iterations between field dumps, 0 = none

  /// Throws Config on the first invalid value.
  void validate() const;
};

/// Sectioned key-value text:
///
///   # comment
///   [problem]
///   name = isotropic_cantilever_2d
///   nx = 96
///
/// Lists are whitespace- or comma-separated. Relative input paths are
/// resolved against `base_dir`; the output directory is used as given.
/// Errors carry "<source>:<line>:" context.
RunConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir = "");

/// Reads, parses and validates a config file.
RunConfig load_config(const std::string& path);

}  // namespace simpl
