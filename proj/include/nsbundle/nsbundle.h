/* C interface to the nsbundle solvers and benchmark suite. */
#ifndef NSBUNDLE_H
#define NSBUNDLE_H

#include <stddef.h>

#if defined(NSB_BUILDING_LIBRARY)
#define NSB_API __attribute__((visibility("default")))
#else
#define NSB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nsb_status {
  NSB_OK = 0,
  NSB_ERR_INVALID_ARGUMENT = 1,
  NSB_ERR_DIMENSION_MISMATCH = 2,
  NSB_ERR_EMPTY_BUNDLE = 3,
  NSB_ERR_NON_FINITE = 4,
  NSB_ERR_INFEASIBLE = 5,
  NSB_ERR_NUMERICAL = 6,
  NSB_ERR_LOWER_MODEL = 7,
  NSB_ERR_IO = 8,
  NSB_ERR_ORACLE = 9,
  NSB_ERR_INTERNAL = 99
} nsb_status;

typedef struct nsb_config nsb_config;
typedef struct nsb_result nsb_result;
typedef struct nsb_report nsb_report;

/* Message for the last failed call on this thread; "" if none. */
NSB_API const char* nsb_last_error(void);
NSB_API const char* nsb_version(void);
/* Frees strings returned through char** out-parameters. */
NSB_API void nsb_string_free(char* s);

/* ---- problem registry ---- */

typedef struct nsb_problem_info {
  int id;
  const char* name; /* static storage */
  int dimension;
  double optimal_value;
  double f_inf_default;
} nsb_problem_info;

NSB_API int nsb_problem_count(void);
NSB_API nsb_status nsb_problem_get(int id, nsb_problem_info* out);
/* Id or case-insensitive name. */
NSB_API nsb_status nsb_problem_find(const char* key, int* id);
/* Copies the start point; `n` must equal the dimension. */
NSB_API nsb_status nsb_problem_start_point(int id, double* x, size_t n);
/* f and a subgradient; `g` may be NULL. */
NSB_API nsb_status nsb_problem_evaluate(int id, const double* x, size_t n, double* f, double* g);
NSB_API nsb_status nsb_problems_json(char** out);

/* ---- configuration ---- */

NSB_API nsb_status nsb_config_new(nsb_config** out);
NSB_API void nsb_config_free(nsb_config* cfg);

/* Numeric options: "mu", "kappa", "sigma", "f_inf", "max_steps", "gap_tol",
 * "delta_tol", "box_radius", "jobs", "unbounded_level" (0/1).
 * Setting "f_inf" overrides every problem's default. */
NSB_API nsb_status nsb_config_set(nsb_config* cfg, const char* key, double value);
/* String options: "beta" (zero|guler), "trace_dir". */
NSB_API nsb_status nsb_config_set_string(nsb_config* cfg, const char* key, const char* value);
/* fpcpa|fla|fdsa|cpba|all. The first call replaces the default (fpcpa). */
NSB_API nsb_status nsb_config_add_algorithm(nsb_config* cfg, const char* name);
/* Problem id, name or "all". Only used by nsb_run_suite. */
NSB_API nsb_status nsb_config_add_problem(nsb_config* cfg, const char* key);

/* ---- single runs ---- */

/* User oracle: write f(x) and a subgradient into *f and g[0..n).
 * Return nonzero to abort the run. */
typedef int (*nsb_oracle_fn)(void* user, const double* x, size_t n, double* f, double* g);

/* Runs the first configured algorithm. `fstar` enables the gap stop; pass
 * NaN when unknown. A run that fails numerically still returns a result
 * whose termination is "Failed". */
NSB_API nsb_status nsb_solve(const nsb_config* cfg, nsb_oracle_fn oracle, void* user, const double* x0, size_t n,
                             double fstar, nsb_result** out);
/* Same on a registry problem, with its f* and default f_inf. */
NSB_API nsb_status nsb_solve_problem(const nsb_config* cfg, int problem_id, nsb_result** out);
NSB_API void nsb_result_free(nsb_result* r);

NSB_API const char* nsb_result_termination(const nsb_result* r);
NSB_API const char* nsb_result_error(const nsb_result* r);
NSB_API double nsb_result_f_best(const nsb_result* r);
NSB_API long nsb_result_oracle_calls(const nsb_result* r);
NSB_API long nsb_result_steps(const nsb_result* r);
NSB_API size_t nsb_result_dimension(const nsb_result* r);
NSB_API nsb_status nsb_result_x_best(const nsb_result* r, double* x, size_t n);
NSB_API nsb_status nsb_result_trace_jsonl(const nsb_result* r, char** out);

/* ---- suites ---- */

typedef struct nsb_row {
  int problem_id;
  const char* problem;     /* owned by the report */
  const char* algorithm;   /* owned by the report */
  long k_steps;            /* -1 unless CPBA */
  long oracle_calls;
  double final_gap;
  const char* termination; /* static storage */
  const char* error;       /* owned by the report */
  double wall_seconds;
} nsb_row;

NSB_API nsb_status nsb_run_suite(const nsb_config* cfg, nsb_report** out);
NSB_API void nsb_report_free(nsb_report* rep);
NSB_API size_t nsb_report_size(const nsb_report* rep);
NSB_API nsb_status nsb_report_row(const nsb_report* rep, size_t i, nsb_row* out);
NSB_API size_t nsb_report_failures(const nsb_report* rep);
/* format: csv|json|md */
NSB_API nsb_status nsb_report_format(const nsb_report* rep, const char* format, char** out);
NSB_API nsb_status nsb_report_write(const nsb_report* rep, const char* format, const char* path);

/* ---- property suites ---- */

/* Runs the subgradient and lower-model checks on every registry problem.
 * `summary` receives one line per check; `failures` the failing count. */
NSB_API nsb_status nsb_verify_properties(int points, char** summary, int* failures);

#ifdef __cplusplus
}
#endif

#endif
