#include "simpl/simpl.h"

#include <fstream>
#include <memory>
#include <sstream>
#include <streambuf>
#include <string>

#include "../oracles/oracles.hpp"
#include "simpl/config.hpp"
#include "simpl/error.hpp"
#include "simpl/polytope.hpp"
#include "simpl/problems.hpp"
#include "simpl/runner.hpp"

struct simpl_polytope {
  simpl::Polytope value;
};

struct simpl_config {
  simpl::RunConfig value;
};

namespace {

thread_local std::string last_error;

simpl_status status_of(simpl::ErrorCode code) { return static_cast<simpl_status>(static_cast<int>(code)); }

template <class F>
simpl_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return SIMPL_OK;
  } catch (const simpl::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SIMPL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SIMPL_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return SIMPL_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) simpl::fail(simpl::ErrorCode::InvalidArgument, what);
}

// Forwards complete lines to a C callback.
class LineBuffer : public std::streambuf {
 public:
  LineBuffer(simpl_line_sink sink, void* user) : sink_(sink), user_(user) {}
  ~LineBuffer() override { flush_line(); }

 protected:
  int overflow(int ch) override {
    if (ch == traits_type::eof()) return 0;
    if (ch == '\n') {
      flush_line();
    } else {
      line_.push_back(static_cast<char>(ch));
    }
    return ch;
  }

 private:
  void flush_line() {
    if (!line_.empty() && sink_) sink_(line_.c_str(), user_);
    line_.clear();
  }
  simpl_line_sink sink_;
  void* user_;
  std::string line_;
};

}  // namespace

extern "C" {

const char* simpl_version(void) { return "1.0.0"; }

const char* simpl_last_error(void) { return last_error.c_str(); }

const char* simpl_status_name(simpl_status status) {
  if (status == SIMPL_OK) return "ok";
  if (status < SIMPL_ERR_INVALID_ARGUMENT || status > SIMPL_ERR_INTERNAL) return "unknown";
  return simpl::to_string(static_cast<simpl::ErrorCode>(status));
}

simpl_status simpl_polytope_create(const double* vertices, int dim, int count, simpl_polytope** out) {
  return guarded([&] {
    require(vertices && out && dim > 0 && count > 0, "simpl_polytope_create: bad arguments");
    *out = nullptr;
    const simpl::Matrix v = Eigen::Map<const simpl::Matrix>(vertices, dim, count);
    *out = new simpl_polytope{simpl::Polytope(v)};
  });
}

simpl_status simpl_polytope_load(const char* path, simpl_polytope** out) {
  return guarded([&] {
    require(path && out, "simpl_polytope_load: bad arguments");
    *out = nullptr;
    std::ifstream in(path);
    if (!in) simpl::fail(simpl::ErrorCode::Io, std::string("cannot open '") + path + "'");
    *out = new simpl_polytope{simpl::read_polytope(in)};
  });
}

void simpl_polytope_destroy(simpl_polytope* polytope) { delete polytope; }

int simpl_polytope_dim(const simpl_polytope* p) { return p ? p->value.dim() : 0; }
int simpl_polytope_count(const simpl_polytope* p) { return p ? p->value.vertex_count() : 0; }
int simpl_polytope_rank(const simpl_polytope* p) { return p ? p->value.rank() : 0; }

simpl_status simpl_gradient_map(const simpl_polytope* p, const double* psi, double* eta, double* lambda) {
  return guarded([&] {
    require(p && psi && eta, "simpl_gradient_map: bad arguments");
    const int n = p->value.dim();
    const auto r = simpl::gradient_map(p->value, Eigen::Map<const simpl::Vector>(psi, n));
    Eigen::Map<simpl::Vector>(eta, n) = r.point;
    if (lambda) Eigen::Map<simpl::Vector>(lambda, p->value.vertex_count()) = r.lambda;
  });
}

simpl_status simpl_inverse_map(const simpl_polytope* p, const double* eta, double* psi) {
  return guarded([&] {
    require(p && eta && psi, "simpl_inverse_map: bad arguments");
    const int n = p->value.dim();
    Eigen::Map<simpl::Vector>(psi, n) = simpl::inverse_map(p->value, Eigen::Map<const simpl::Vector>(eta, n));
  });
}

simpl_status simpl_conjugate(const simpl_polytope* p, const double* psi, double* value) {
  return guarded([&] {
    require(p && psi && value, "simpl_conjugate: bad arguments");
    *value = simpl::conjugate_value(p->value, Eigen::Map<const simpl::Vector>(psi, p->value.dim()));
  });
}

simpl_status simpl_entropy(const simpl_polytope* p, const double* eta, double* value) {
  return guarded([&] {
    require(p && eta && value, "simpl_entropy: bad arguments");
    *value = simpl::entropy_value(p->value, Eigen::Map<const simpl::Vector>(eta, p->value.dim()));
  });
}

simpl_status simpl_bregman(const simpl_polytope* p, const double* eta, const double* v, double* value) {
  return guarded([&] {
    require(p && eta && v && value, "simpl_bregman: bad arguments");
    const int n = p->value.dim();
    *value = simpl::bregman_divergence(p->value, Eigen::Map<const simpl::Vector>(eta, n),
                                       Eigen::Map<const simpl::Vector>(v, n));
  });
}

simpl_status simpl_config_load(const char* path, simpl_config** out) {
  return guarded([&] {
    require(path && out, "simpl_config_load: bad arguments");
    *out = nullptr;
    *out = new simpl_config{simpl::load_config(path)};
  });
}

void simpl_config_destroy(simpl_config* config) { delete config; }

simpl_status simpl_config_validate(const simpl_config* config) {
  return guarded([&] {
    require(config, "simpl_config_validate: null config");
    config->value.validate();
    (void)simpl::build_problem(config->value.problem);
  });
}

const char* simpl_config_problem(const simpl_config* config) {
  return config ? config->value.problem.name.c_str() : "";
}

simpl_status simpl_run(const simpl_config* config, simpl_line_sink progress, void* user, simpl_run_summary* summary) {
  return guarded([&] {
    require(config && summary, "simpl_run: bad arguments");
    LineBuffer buffer(progress, user);
    std::ostream lines(&buffer);
    const simpl::RunReport r = simpl::run_experiment(config->value, progress ? &lines : nullptr);
    *summary = simpl_run_summary{r.exit_code,
                                 r.iterations,
                                 r.initial_value,
                                 r.final_value,
                                 r.final_residual,
                                 r.relative_residual,
                                 r.wall_seconds,
                                 r.max_backtracks,
                                 r.backtracks_exhausted ? 1 : 0,
                                 r.monotone ? 1 : 0,
                                 r.max_violation,
                                 r.min_log_barycentric,
                                 r.min_alpha,
                                 r.max_alpha,
                                 r.mean_saturation};
    if (r.exit_code == simpl::kExitError) last_error = r.message;
  });
}

int simpl_oracle_count(void) { return static_cast<int>(simpl::oracles::names().size()); }

const char* simpl_oracle_name(int index) {
  static const std::vector<std::string> names = simpl::oracles::names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[index].c_str();
}

simpl_status simpl_oracle_run(const char* name, simpl_value_sink sink, void* user) {
  return guarded([&] {
    require(name && sink, "simpl_oracle_run: bad arguments");
    std::vector<std::pair<std::string, double>> values;
    try {
      values = simpl::oracles::run(name);
    } catch (const std::invalid_argument& e) {
      simpl::fail(simpl::ErrorCode::InvalidArgument, e.what());
    }
    for (const auto& [label, value] : values) sink(label.c_str(), value, user);
  });
}

}  // extern "C"
