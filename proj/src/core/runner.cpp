#include "simpl/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "simpl/error.hpp"
#include "simpl/export.hpp"

namespace simpl {

namespace fs = std::filesystem;

namespace {

std::string describe(const Error& e) {
  std::ostringstream out;
  out << to_string(e.code()) << ": " << e.what();
  if (!e.data().empty()) {
    out << " [" << std::setprecision(6);
    for (std::size_t i = 0; i < e.data().size(); ++i) out << (i ? " " : "") << e.data()[i];
    out << "]";
  }
  return out.str();
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

std::string padded(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d", k);
  return buf;
}

void write_fields(const std::string& dir, const std::string& vtk_name, const std::string& pgm_suffix,
                  const CellField& eta, const CellField& psi, const std::vector<NamedNodalField>& nodal = {}) {
  write_vtk_file(join(dir, vtk_name), eta.mesh(), {{"eta", &eta}, {"psi", &psi}}, nodal);
  for (int c = 0; c < eta.channels(); ++c) {
    write_pgm_file(join(dir, "eta_" + std::to_string(c + 1) + "_" + pgm_suffix + ".pgm"), eta, c);
  }
}

void write_history(const std::string& dir, const OptHistory& history) {
  std::ofstream out(join(dir, "history.csv"));
  if (!out) fail(ErrorCode::Io, "cannot write history.csv");
  history.write_csv(out);
  if (!out) fail(ErrorCode::Io, "error while writing history.csv");
}

void summarize(RunReport& report, const OptHistory& history, const GlobalConstraints& constraints) {
  report.history = history;
  report.initial_value = history.initial_value;
  report.iterations = static_cast<int>(history.records.size());
  report.min_log_barycentric = std::numeric_limits<double>::infinity();
  report.min_alpha = std::numeric_limits<double>::infinity();
  report.max_alpha = 0.0;
  auto excess = [&](const Vector& values) {
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i) worst = std::max(worst, values[i] - constraints.bounds()[i]);
    return worst;
  };
  report.max_violation = constraints.count() ? excess(history.initial_constraint_values) : 0.0;
  double previous = history.initial_value;
  for (const auto& r : history.records) {
    report.monotone = report.monotone && r.value <= previous;
    previous = r.value;
    report.max_backtracks = std::max(report.max_backtracks, r.backtracks);
    report.backtracks_exhausted = report.backtracks_exhausted || r.backtracks_exhausted;
    if (constraints.count()) report.max_violation = std::max(report.max_violation, excess(r.constraint_values));
    report.min_log_barycentric = std::min(report.min_log_barycentric, r.min_log_barycentric);
    report.min_alpha = std::min(report.min_alpha, r.alpha);
    report.max_alpha = std::max(report.max_alpha, r.alpha);
  }
  if (!history.records.empty()) {
    report.final_value = history.records.back().value;
    report.final_residual = history.records.back().residual;
    const double res0 = history.records.front().residual;
    report.relative_residual = res0 > 0.0 ? report.final_residual / res0 : 0.0;
  } else {
    report.final_value = history.initial_value;
  }
}

void write_summary(const std::string& dir, const RunConfig& cfg, const RunReport& r, const std::string& status) {
  std::ofstream out(join(dir, "summary.txt"));
  if (!out) fail(ErrorCode::Io, "cannot write summary.txt");
  out << std::setprecision(17);
  out << "problem = " << cfg.problem.name << '\n'
      << "grid = " << cfg.problem.nx << ' ' << cfg.problem.ny << '\n'
      << "status = " << status << '\n'
      << "exit_code = " << r.exit_code << '\n';
  if (!r.message.empty()) out << "error = " << r.message << '\n';
  out << "iterations = " << r.iterations << '\n'
      << "initial_F = " << r.initial_value << '\n'
      << "final_F = " << r.final_value << '\n'
      << "final_res = " << r.final_residual << '\n'
      << "relative_res = " << r.relative_residual << '\n'
      << "max_backtracks = " << r.max_backtracks << '\n'
      << "backtracks_exhausted = " << (r.backtracks_exhausted ? "yes" : "no") << '\n'
      << "monotone = " << (r.monotone ? "yes" : "no") << '\n'
      << "max_constraint_excess = " << r.max_violation << '\n'
      << "min_log_barycentric = " << r.min_log_barycentric << '\n'
      << "alpha_range = " << r.min_alpha << ' ' << r.max_alpha << '\n'
      << "mean_saturation = " << r.mean_saturation << '\n'
      << "wall_seconds = " << r.wall_seconds << '\n';
}

}  // namespace

double mean_saturation(const std::string& problem_name, const CellField& eta) {
  if (eta.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t e = 0; e < eta.size(); ++e) {
    const auto v = eta.at(e);
    if (problem_name == kOrthotropicCantilever && v.size() == 3) {
      total += std::max(v[0], std::hypot(v[1], v[2]));
    } else {
      total += *std::max_element(v.begin(), v.end());
    }
  }
  return total / static_cast<double>(eta.size());
}

RunReport run_experiment(const RunConfig& cfg, std::ostream* progress) {
  RunReport report;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  cfg.validate();
  Problem problem = build_problem(cfg.problem);

  const std::string& dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory '" + dir + "': " + ec.message());
  {
    std::ofstream out(join(dir, "polytope.txt"));
    if (!out) fail(ErrorCode::Io, "cannot write polytope.txt");
    write_polytope(out, problem.polytope());
  }

  IterateObserver observer = [&](const IterationRecord& rec, const CellField& eta, const CellField& psi) {
    if (progress) {
      *progress << std::setprecision(6) << "k=" << rec.k << " F=" << rec.value << " res=" << rec.residual
                << " alpha=" << rec.alpha << " backtracks=" << rec.backtracks << '\n';
    }
    const int k = rec.k + 1;
    if (cfg.snapshot_period > 0 && k % cfg.snapshot_period == 0) {
      write_fields(dir, "snapshot_" + padded(k) + ".vtk", padded(k), eta, psi);
    }
  };

  try {
    RunResult result = simpl_run(problem.objective(), problem.polytope(), problem.constraints(), problem.psi0(),
                                 cfg.optimizer, observer);
    summarize(report, result.history, problem.constraints());
    report.exit_code = result.reason == StopReason::Tolerance ? kExitConverged : kExitMaxIterations;
    report.mean_saturation = mean_saturation(cfg.problem.name, result.eta);

    write_history(dir, result.history);
    const ComplianceResult final_state = problem.evaluate(result.eta);
    write_fields(dir, "design_final.vtk", "final", result.eta, result.psi,
                 {{"eta_filtered", &final_state.filtered, false}, {"displacement", &final_state.displacement, true}});
    report.wall_seconds = elapsed();
    write_summary(dir, cfg, report, report.exit_code == kExitConverged ? "converged" : "max_iterations");
    report.result = std::move(result);
  } catch (const RunAborted& e) {
    summarize(report, e.history(), problem.constraints());
    report.exit_code = kExitError;
    report.message = describe(e);
    report.wall_seconds = elapsed();
    write_history(dir, e.history());
    write_summary(dir, cfg, report, "error");
  }
  return report;
}

int run_command(const std::string& config_path, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_config(config_path);
    RunReport r = run_experiment(cfg, &out);
    if (r.exit_code == kExitError) {
      err << "error: " << r.message << '\n';
      return kExitError;
    }
    out << std::setprecision(10) << (r.exit_code == kExitConverged ? "converged" : "stopped at max_iters")
        << " after " << r.iterations << " iterations: F=" << r.final_value << " res/res0=" << r.relative_residual
        << " (" << std::setprecision(3) << r.wall_seconds << " s)\n";
    return r.exit_code;
  } catch (const Error& e) {
    err << "error: " << describe(e) << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int validate_command(const std::string& config_path, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_config(config_path);
    const Problem problem = build_problem(cfg.problem);
    out << config_path << ": ok (" << problem.name() << ", " << problem.mesh().nx() << "x" << problem.mesh().ny()
        << ", " << problem.polytope().vertex_count() << " vertices, " << problem.constraints().count()
        << " constraints)\n";
    return kExitConverged;
  } catch (const Error& e) {
    err << "error: " << describe(e) << '\n';
    return kExitError;
  }
}

}  // namespace simpl
