#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "simpl/config.hpp"
#include "simpl/optimizer.hpp"
#include "simpl/problems.hpp"

namespace simpl {

/// Exit statuses of a run.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMaxIterations = 2;

struct RunReport {
  int exit_code = kExitError;
  std::string message;  // error text when exit_code == kExitError
  int iterations = 0;
  double initial_value = 0.0;
  double final_value = 0.0;
  double final_residual = 0.0;
  double relative_residual = 0.0;
  double wall_seconds = 0.0;
  int max_backtracks = 0;
  bool backtracks_exhausted = false;
  bool monotone = true;            // F nonincreasing over accepted iterates
  double max_violation = 0.0;      // worst constraint excess over all iterates
  double min_log_barycentric = 0.0;  // smallest over all iterates
  double min_alpha = 0.0;
  double max_alpha = 0.0;
  double mean_saturation = 0.0;    // mean over cells of the dominant phase weight
  std::optional<OptHistory> history;
  std::optional<RunResult> result;
};

/// Builds the problem, runs the optimizer and writes the artifacts to
/// cfg.output_dir. Problem set-up errors are reported before the output
/// directory is created; solver errors keep the partial history. Progress
/// lines go to `progress` when given.
RunReport run_experiment(const RunConfig& cfg, std::ostream* progress = nullptr);

/// Mean over cells of the dominant phase weight: max(s, r) with
/// r = |(eta_2, eta_3)| for the orientation problem, max_i eta_i otherwise.
double mean_saturation(const std::string& problem_name, const CellField& eta);

/// Command-line entry points; return the process exit status.
int run_command(const std::string& config_path, std::ostream& out, std::ostream& err);
int validate_command(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace simpl
