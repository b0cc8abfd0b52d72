// simpl command-line front end. Uses only the C interface.

#include <simpl/simpl.h>

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

namespace {

void print_line(const char* line, void*) { std::printf("%s\n", line); }

void print_value(const char* label, double value, void*) { std::printf("%s = %.17g\n", label, value); }

int report(simpl_status status) {
  std::fprintf(stderr, "error: %s: %s\n", simpl_status_name(status), simpl_last_error());
  return 1;
}

int do_run(const std::string& path, bool quiet) {
  simpl_config* cfg = nullptr;
  if (simpl_status s = simpl_config_load(path.c_str(), &cfg); s != SIMPL_OK) return report(s);
  simpl_run_summary summary{};
  const simpl_status s = simpl_run(cfg, quiet ? nullptr : print_line, nullptr, &summary);
  simpl_config_destroy(cfg);
  if (s != SIMPL_OK) return report(s);
  if (summary.outcome == SIMPL_RUN_FAILED) {
    std::fprintf(stderr, "error: %s\n", simpl_last_error());
    return 1;
  }
  std::printf("%s after %d iterations: F=%.10g res/res0=%.3g max_backtracks=%d (%.2f s)\n",
              summary.outcome == SIMPL_RUN_CONVERGED ? "converged" : "stopped at max_iters", summary.iterations,
              summary.final_value, summary.relative_residual, summary.max_backtracks, summary.wall_seconds);
  return summary.outcome;
}

int do_validate(const std::string& path) {
  simpl_config* cfg = nullptr;
  if (simpl_status s = simpl_config_load(path.c_str(), &cfg); s != SIMPL_OK) return report(s);
  const simpl_status s = simpl_config_validate(cfg);
  const std::string name = simpl_config_problem(cfg);
  simpl_config_destroy(cfg);
  if (s != SIMPL_OK) return report(s);
  std::printf("%s: ok (%s)\n", path.c_str(), name.c_str());
  return 0;
}

int do_oracle(const std::string& name) {
  if (name == "list") {
    for (int i = 0; i < simpl_oracle_count(); ++i) std::printf("%s\n", simpl_oracle_name(i));
    return 0;
  }
  if (simpl_status s = simpl_oracle_run(name.c_str(), print_value, nullptr); s != SIMPL_OK) return report(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected mirror descent for multi-material topology optimization"};
  app.set_version_flag("--version", std::string(simpl_version()));
  app.require_subcommand(1);

  std::string run_path, validate_path, oracle_name;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the optimizer described by a config file");
  run->add_option("config", run_path, "Config file")->required();
  run->add_flag("-q,--quiet", quiet, "Do not print per-iteration progress");
  auto* validate = app.add_subcommand("validate", "Parse a config and set up its problem without solving");
  validate->add_option("config", validate_path, "Config file")->required();
  auto* oracle = app.add_subcommand("oracle", "Print the values of a reference oracle ('list' for names)");
  oracle->add_option("name", oracle_name, "Oracle name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*run) return do_run(run_path, quiet);
  if (*validate) return do_validate(validate_path);
  return do_oracle(oracle_name);
}
