#ifndef PHLAB_H
#define PHLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define PHLAB_API __attribute__((visibility("default")))
#else
#define PHLAB_API
#endif

/* Status codes. Non-zero values match the library's internal error categories. */
typedef enum phlab_status {
  PHLAB_OK = 0,
  PHLAB_ERR_INPUT = 1,
  PHLAB_ERR_CONVERGENCE = 2,
  PHLAB_ERR_SINGULARITY = 3,
  PHLAB_ERR_DEGENERACY = 4,
  PHLAB_ERR_NUMERICAL = 5,
  PHLAB_ERR_INTERNAL = 6,
  PHLAB_ERR_IO = 7,
  PHLAB_ERR_CONFIG = 8,
  PHLAB_ERR_BUDGET = 9,
  PHLAB_ERR_NULL = 10,
  PHLAB_ERR_UNKNOWN = 11
} phlab_status;

typedef struct phlab_model phlab_model;
typedef struct phlab_experiment phlab_experiment;

PHLAB_API const char* phlab_version(void);
PHLAB_API const char* phlab_status_name(phlab_status status);
/* Message of the last failed call on this thread; empty after a successful call. */
PHLAB_API const char* phlab_last_error(void);

/* Models. "cat2", "paper3" or "derived3". */
PHLAB_API phlab_status phlab_model_builtin(const char* name, phlab_model** out);
/* x -> A x mod 1; `entries` is row-major dim x dim. */
PHLAB_API phlab_status phlab_model_linear(int dim, const int64_t* entries, phlab_model** out);
/* Derived-from-Anosov perturbation of a 3x3 base at the origin. */
PHLAB_API phlab_status phlab_model_derived(const int64_t* entries3x3, double delta, double t, double rho,
                                           phlab_model** out);
PHLAB_API void phlab_model_free(phlab_model* model);
PHLAB_API int phlab_model_dim(const phlab_model* model);
PHLAB_API int phlab_model_degree(const phlab_model* model);
PHLAB_API phlab_status phlab_model_eval(const phlab_model* model, const double* x, double* out);
/* Row-major dim x dim. */
PHLAB_API phlab_status phlab_model_derivative(const phlab_model* model, const double* x, double* out);
/* Descending exponents (dim of them) along the orbit of x over n >= 1000 steps. */
PHLAB_API phlab_status phlab_model_lyapunov(const phlab_model* model, const double* x, int n, double* out);

/* Experiments. */
PHLAB_API phlab_status phlab_experiment_create(phlab_experiment** out);
PHLAB_API void phlab_experiment_free(phlab_experiment* exp);
PHLAB_API phlab_status phlab_experiment_load_config(phlab_experiment* exp, const char* path);
PHLAB_API phlab_status phlab_experiment_load_config_string(phlab_experiment* exp, const char* yaml);
/* Dotted key such as "volume_lemma.eps"; the value is parsed as YAML. */
PHLAB_API phlab_status phlab_experiment_set(phlab_experiment* exp, const char* key, const char* value);
/* `pass` receives 1 for a pass verdict, 0 for a fail verdict. */
PHLAB_API phlab_status phlab_experiment_run(phlab_experiment* exp, const char* subcommand, int* pass);
/* Valid until the next run or free. */
PHLAB_API const char* phlab_experiment_verdict(const phlab_experiment* exp);
PHLAB_API const char* phlab_experiment_summary_json(const phlab_experiment* exp);
PHLAB_API const char* phlab_experiment_output_dir(const phlab_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif
