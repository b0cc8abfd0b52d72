/* C interface to the simpl library. All functions return a status code;
 * on failure simpl_last_error() describes the most recent error on the
 * calling thread. Handles are opaque and owned by the caller. */
#ifndef SIMPL_SIMPL_H
#define SIMPL_SIMPL_H

#include <stddef.h>

#if defined(SIMPL_BUILDING_LIBRARY)
#define SIMPL_API __attribute__((visibility("default")))
#else
#define SIMPL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum simpl_status {
  SIMPL_OK = 0,
  SIMPL_ERR_INVALID_ARGUMENT = 1,
  SIMPL_ERR_BOUNDARY_PROXIMITY = 2,
  SIMPL_ERR_INFEASIBLE = 3,
  SIMPL_ERR_NON_CONVERGENCE = 4,
  SIMPL_ERR_LINEAR_SOLVE = 5,
  SIMPL_ERR_IO = 6,
  SIMPL_ERR_CONFIG = 7,
  SIMPL_ERR_INTERNAL = 8
} simpl_status;

/* Outcome of a run, mirroring the CLI exit codes. */
typedef enum simpl_outcome {
  SIMPL_RUN_CONVERGED = 0,
  SIMPL_RUN_FAILED = 1,
  SIMPL_RUN_MAX_ITERATIONS = 2
} simpl_outcome;

typedef struct simpl_polytope simpl_polytope;
typedef struct simpl_config simpl_config;

typedef struct simpl_run_summary {
  int outcome; /* simpl_outcome */
  int iterations;
  double initial_value;
  double final_value;
  double final_residual;
  double relative_residual;
  double wall_seconds;
  int max_backtracks;
  int backtracks_exhausted;
  int monotone;
  double max_constraint_excess;
  double min_log_barycentric;
  double min_alpha;
  double max_alpha;
  double mean_saturation;
} simpl_run_summary;

SIMPL_API const char* simpl_version(void);
SIMPL_API const char* simpl_last_error(void);
SIMPL_API const char* simpl_status_name(simpl_status status);

/* Polytope from a column-major dim x count vertex matrix. */
SIMPL_API simpl_status simpl_polytope_create(const double* vertices, int dim, int count, simpl_polytope** out);
SIMPL_API simpl_status simpl_polytope_load(const char* path, simpl_polytope** out);
SIMPL_API void simpl_polytope_destroy(simpl_polytope* polytope);
SIMPL_API int simpl_polytope_dim(const simpl_polytope* polytope);
SIMPL_API int simpl_polytope_count(const simpl_polytope* polytope);
SIMPL_API int simpl_polytope_rank(const simpl_polytope* polytope);

/* eta = V softmax(V^T psi); lambda (count entries) may be NULL. */
SIMPL_API simpl_status simpl_gradient_map(const simpl_polytope* polytope, const double* psi, double* eta,
                                          double* lambda);
SIMPL_API simpl_status simpl_inverse_map(const simpl_polytope* polytope, const double* eta, double* psi);
SIMPL_API simpl_status simpl_conjugate(const simpl_polytope* polytope, const double* psi, double* value);
SIMPL_API simpl_status simpl_entropy(const simpl_polytope* polytope, const double* eta, double* value);
SIMPL_API simpl_status simpl_bregman(const simpl_polytope* polytope, const double* eta, const double* v,
                                     double* value);

/* Parses and validates a config file (no solve, no output). */
SIMPL_API simpl_status simpl_config_load(const char* path, simpl_config** out);
SIMPL_API void simpl_config_destroy(simpl_config* config);
/* Builds the problem described by the config, which also checks that the
 * constraints admit an interior design. */
SIMPL_API simpl_status simpl_config_validate(const simpl_config* config);
SIMPL_API const char* simpl_config_problem(const simpl_config* config);

/* Runs the optimizer and writes the artifacts. A solver failure still
 * returns SIMPL_OK with outcome SIMPL_RUN_FAILED and the partial
 * summary; set-up failures return an error status. `progress` (may be NULL)
 * receives one line per iteration. */
typedef void (*simpl_line_sink)(const char* line, void* user);
SIMPL_API simpl_status simpl_run(const simpl_config* config, simpl_line_sink progress, void* user,
                                 simpl_run_summary* summary);

/* Reference oracles: names, and the values of the canonical instance. */
typedef void (*simpl_value_sink)(const char* label, double value, void* user);
SIMPL_API int simpl_oracle_count(void);
SIMPL_API const char* simpl_oracle_name(int index);
SIMPL_API simpl_status simpl_oracle_run(const char* name, simpl_value_sink sink, void* user);

#ifdef __cplusplus
}
#endif

#endif
