/* Exercises the C interface through the shared library only. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "simpl/simpl.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static int oracle_values = 0;
static void count_value(const char* label, double value, void* user) {
  (void)label;
  (void)user;
  if (isfinite(value)) ++oracle_values;
}

static void test_polytope(void) {
  /* unit square, column-major 2 x 4 */
  const double square[] = {0, 0, 1, 0, 1, 1, 0, 1};
  simpl_polytope* p = NULL;
  EXPECT(simpl_polytope_create(square, 2, 4, &p) == SIMPL_OK);
  EXPECT(simpl_polytope_dim(p) == 2);
  EXPECT(simpl_polytope_count(p) == 4);
  EXPECT(simpl_polytope_rank(p) == 2);

  const double psi[] = {0.7, -1.2};
  double eta[2], lambda[4], back[2], value = 0.0;
  EXPECT(simpl_gradient_map(p, psi, eta, lambda) == SIMPL_OK);
  EXPECT(fabs(eta[0] - 1.0 / (1.0 + exp(-0.7))) < 1e-14);
  EXPECT(fabs(eta[1] - 1.0 / (1.0 + exp(1.2))) < 1e-14);
  EXPECT(fabs(lambda[0] + lambda[1] + lambda[2] + lambda[3] - 1.0) < 1e-14);
  EXPECT(simpl_gradient_map(p, psi, eta, NULL) == SIMPL_OK);

  EXPECT(simpl_inverse_map(p, eta, back) == SIMPL_OK);
  EXPECT(fabs(back[0] - psi[0]) < 1e-8 && fabs(back[1] - psi[1]) < 1e-8);

  const double zero[] = {0, 0};
  EXPECT(simpl_conjugate(p, zero, &value) == SIMPL_OK);
  EXPECT(fabs(value - log(4.0)) < 1e-14);
  const double centre[] = {0.5, 0.5};
  EXPECT(simpl_entropy(p, centre, &value) == SIMPL_OK);
  EXPECT(fabs(value + log(4.0)) < 1e-12);
  EXPECT(simpl_bregman(p, centre, centre, &value) == SIMPL_OK);
  EXPECT(fabs(value) < 1e-14);

  const double outside[] = {1.5, 0.5};
  EXPECT(simpl_inverse_map(p, outside, back) == SIMPL_ERR_BOUNDARY_PROXIMITY);
  EXPECT(strlen(simpl_last_error()) > 0);
  EXPECT(simpl_conjugate(p, zero, &value) == SIMPL_OK);
  EXPECT(strlen(simpl_last_error()) == 0);

  EXPECT(simpl_gradient_map(NULL, psi, eta, NULL) == SIMPL_ERR_INVALID_ARGUMENT);
  EXPECT(simpl_gradient_map(p, NULL, eta, NULL) == SIMPL_ERR_INVALID_ARGUMENT);
  simpl_polytope_destroy(p);
  simpl_polytope_destroy(NULL);

  const double dup[] = {0, 0, 0, 0};
  simpl_polytope* q = NULL;
  EXPECT(simpl_polytope_create(dup, 2, 2, &q) == SIMPL_ERR_INVALID_ARGUMENT);
  EXPECT(q == NULL);
  EXPECT(simpl_polytope_load("/nonexistent/polytope.txt", &q) == SIMPL_ERR_IO);
}

static void test_config(void) {
  simpl_config* c = NULL;
  EXPECT(simpl_config_load("/nonexistent/run.cfg", &c) == SIMPL_ERR_CONFIG);
  EXPECT(c == NULL);
  EXPECT(strstr(simpl_last_error(), "cannot open") != NULL);
  EXPECT(simpl_run(NULL, NULL, NULL, NULL) == SIMPL_ERR_INVALID_ARGUMENT);
}

static void test_misc(void) {
  EXPECT(strcmp(simpl_version(), "1.0.0") == 0);
  EXPECT(strcmp(simpl_status_name(SIMPL_OK), "ok") == 0 || strlen(simpl_status_name(SIMPL_OK)) > 0);
  EXPECT(strlen(simpl_status_name(SIMPL_ERR_LINEAR_SOLVE)) > 0);
  EXPECT(simpl_oracle_count() == 8);
  EXPECT(simpl_oracle_name(0) != NULL);
  EXPECT(simpl_oracle_name(99) == NULL);
  for (int i = 0; i < simpl_oracle_count(); ++i) {
    oracle_values = 0;
    EXPECT(simpl_oracle_run(simpl_oracle_name(i), count_value, NULL) == SIMPL_OK);
    EXPECT(oracle_values > 0);
  }
  EXPECT(simpl_oracle_run("nope", count_value, NULL) == SIMPL_ERR_INVALID_ARGUMENT);
}

int main(void) {
  test_polytope();
  test_config();
  test_misc();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("all C interface checks passed\n");
  return 0;
}
