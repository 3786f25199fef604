/* Exercises the public header from plain C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "phlab/phlab.h"

static int failures = 0;
#define EXPECT(cond)                                           \
  do {                                                         \
    if (!(cond)) {                                             \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                              \
    }                                                          \
  } while (0)

int main(int argc, char** argv) {
  const char* out = argc > 1 ? argv[1] : "capi_out";
  phlab_model* m = NULL;
  EXPECT(phlab_model_builtin("cat2", &m) == PHLAB_OK);
  EXPECT(phlab_model_dim(m) == 2);
  EXPECT(phlab_model_degree(m) == 1);
  double x[2] = {0.25, 0.5}, y[2], d[4], ly[2];
  EXPECT(phlab_model_eval(m, x, y) == PHLAB_OK);
  EXPECT(fabs(y[0] - 0.0) < 1e-15 && fabs(y[1] - 0.75) < 1e-15);
  EXPECT(phlab_model_derivative(m, x, d) == PHLAB_OK);
  EXPECT(d[0] == 2.0 && d[1] == 1.0 && d[2] == 1.0 && d[3] == 1.0);
  EXPECT(phlab_model_lyapunov(m, x, 10, ly) == PHLAB_ERR_INPUT);
  EXPECT(strlen(phlab_last_error()) > 0);
  EXPECT(phlab_model_lyapunov(m, x, 5000, ly) == PHLAB_OK);
  EXPECT(strlen(phlab_last_error()) == 0);
  EXPECT(fabs(ly[0] - log((3.0 + sqrt(5.0)) / 2.0)) < 1e-3);
  phlab_model_free(m);

  phlab_model* bad = NULL;
  EXPECT(phlab_model_builtin("nope", &bad) == PHLAB_ERR_INPUT && bad == NULL);
  const int64_t id[4] = {1, 0, 0, 1};
  EXPECT(phlab_model_linear(2, id, &bad) == PHLAB_ERR_INPUT);
  const int64_t p3[9] = {2, 1, 0, 1, 1, 0, 0, 0, 2};
  EXPECT(phlab_model_derived(p3, 0.05, 1.0, 0.3, &bad) == PHLAB_ERR_INPUT);
  EXPECT(strstr(phlab_last_error(), "domination") != NULL);
  EXPECT(phlab_model_derived(p3, 0.05, 1.0, 0.6, &m) == PHLAB_OK);
  EXPECT(phlab_model_degree(m) == 2);
  phlab_model_free(m);
  EXPECT(phlab_model_eval(NULL, x, y) == PHLAB_ERR_NULL);
  EXPECT(strcmp(phlab_status_name(PHLAB_ERR_BUDGET), "budget") == 0);

  phlab_experiment* e = NULL;
  EXPECT(phlab_experiment_create(&e) == PHLAB_OK);
  EXPECT(phlab_experiment_load_config_string(e, "seed: 4\nmodel:\n  name: paper3\n  bogus: 1\n") == PHLAB_ERR_CONFIG);
  EXPECT(strstr(phlab_last_error(), "line 4") != NULL);
  EXPECT(phlab_experiment_load_config_string(e, "seed: 4\nmodel:\n  name: paper3\nlyapunov:\n  n: 10000\n") == PHLAB_OK);
  char quoted[512];
  snprintf(quoted, sizeof quoted, "\"%s\"", out);
  EXPECT(phlab_experiment_set(e, "out", quoted) == PHLAB_OK);
  int pass = -1;
  EXPECT(phlab_experiment_run(e, "lyapunov", &pass) == PHLAB_OK);
  EXPECT(pass == 1);
  EXPECT(strstr(phlab_experiment_summary_json(e), "\"log_det_average\"") != NULL);
  EXPECT(phlab_experiment_set(e, "lyapunov.tolerance", "1e-9") == PHLAB_OK);
  EXPECT(phlab_experiment_run(e, "lyapunov", &pass) == PHLAB_OK);
  EXPECT(pass == 0);
  EXPECT(phlab_experiment_run(e, "frobnicate", &pass) == PHLAB_ERR_INPUT);
  phlab_experiment_free(e);

  printf("%s (%d failures)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
