#ifndef SPW_SPW_H
#define SPW_SPW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SPW_BUILDING)
#define SPW_API __declspec(dllexport)
#else
#define SPW_API __declspec(dllimport)
#endif
#else
#define SPW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returns one; details of the most recent
 * failure on the calling thread are available from spw_last_error(). */
typedef enum spw_status {
  SPW_OK = 0,
  SPW_E_INVALID_ARGUMENT = 1,
  SPW_E_IO = 2,
  SPW_E_PARSE = 3,
  SPW_E_MISSING_COLUMN = 4,
  SPW_E_NON_FINITE_VALUE = 5,
  SPW_E_UNKNOWN_TREATMENT_LABEL = 6,
  SPW_E_EMPTY_DATASET = 7,
  SPW_E_STRATUM_TOO_SMALL = 8,
  SPW_E_WRONG_DATASET_MODE = 9,
  SPW_E_NUISANCE_OUT_OF_RANGE = 10,
  SPW_E_MISSING_NUISANCE = 11,
  SPW_E_PERTURBATION_LEAVES_DOMAIN = 12,
  SPW_E_STABILIZER_BOUND_VIOLATED = 13,
  SPW_E_SINGULAR_DESIGN = 14,
  SPW_E_PROPENSITY_ON_BOUNDARY = 15,
  SPW_E_NON_PSD_COVARIANCE = 16,
  SPW_E_DENOMINATOR_ZERO = 17,
  SPW_E_ENUMERATION_TOO_LARGE = 18,
  SPW_E_MODEL_CLASS_TOO_LARGE = 19,
  SPW_E_STATISTIC_NOT_LINEAR = 20,
  SPW_E_TOO_FEW_SAMPLES = 21,
  SPW_E_DEGENERATE_SAMPLES = 22,
  SPW_E_BUFFER_TOO_SMALL = 100,
  SPW_E_INTERNAL = 101
} spw_status;

typedef enum spw_category {
  SPW_CATEGORY_NONE = 0,
  SPW_CATEGORY_CONFIG = 1,
  SPW_CATEGORY_DATA = 2,
  SPW_CATEGORY_NUMERIC = 3,
  SPW_CATEGORY_INTERNAL = 4
} spw_category;

SPW_API const char* spw_version(void);
/* JSON object with compiler and dependency versions. */
SPW_API const char* spw_build_info(void);
SPW_API const char* spw_status_name(spw_status status);
SPW_API spw_category spw_status_category(spw_status status);
/* Message of the last failure on this thread ("" after success). */
SPW_API const char* spw_last_error(void);
/* Row/stratum index attached to the last failure, or -1. */
SPW_API int64_t spw_last_error_index(void);

/* Strings are returned by copying into a caller buffer. *needed receives the
 * length including the terminating NUL; SPW_E_BUFFER_TOO_SMALL is returned
 * when cap is smaller (buf may be NULL to query the size). */

/* ---- datasets ---------------------------------------------------------- */

typedef struct spw_dataset spw_dataset;

typedef enum spw_mode { SPW_MODE_LARGE = 0, SPW_MODE_FINITE = 1 } spw_mode;

typedef struct spw_csv_schema {
  const char* y;        /* outcome column, default "y" */
  const char* w;        /* treatment column, default "w" */
  const char* x;        /* comma list; finite mode uses the first as stratum */
  const char* required; /* comma list of extra columns that must exist */
  spw_mode mode;
  int max_treatment; /* -1 for no limit */
} spw_csv_schema;

SPW_API void spw_csv_schema_init(spw_csv_schema* schema);
SPW_API spw_status spw_dataset_load_csv(const char* path, const spw_csv_schema* schema,
                                        spw_dataset** out);
SPW_API spw_status spw_dataset_from_finite(size_t n, const double* y, const int* w,
                                           const int64_t* strata, int levels,
                                           spw_dataset** out);
/* covariates is row-major n x p. */
SPW_API spw_status spw_dataset_from_large(size_t n, const double* y, const int* w, size_t p,
                                          const double* covariates,
                                          const char* const* names, int levels,
                                          spw_dataset** out);
SPW_API spw_status spw_dataset_add_column(spw_dataset* ds, const char* name,
                                          const double* values, size_t n);
SPW_API void spw_dataset_free(spw_dataset* ds);
SPW_API size_t spw_dataset_size(const spw_dataset* ds);
SPW_API int spw_dataset_levels(const spw_dataset* ds);
SPW_API spw_mode spw_dataset_mode(const spw_dataset* ds);
/* Number of strata (finite mode), 0 otherwise. */
SPW_API size_t spw_dataset_num_strata(const spw_dataset* ds);
/* Copies the named column (extra, covariate or "y") into out[0..n). */
SPW_API spw_status spw_dataset_column(const spw_dataset* ds, const char* name, double* out,
                                      size_t cap);
SPW_API spw_status spw_dataset_write_csv(const spw_dataset* ds, const char* path);

/* ---- residuals --------------------------------------------------------- */

typedef struct spw_residual_kind spw_residual_kind;

/* JSON object such as {"kind":"gnpw","nu1":0,"nu2":0,"theta":[1,0,-2,1]}. */
SPW_API spw_status spw_residual_kind_parse(const char* json, spw_residual_kind** out);
SPW_API void spw_residual_kind_free(spw_residual_kind* kind);
SPW_API spw_status spw_residual_kind_json(const spw_residual_kind* kind, char* buf, size_t cap,
                                          size_t* needed);

typedef struct spw_nuisance {
  double e, mu0, mu1;
  int has_eta;
  double eta;
  int has_r;
  double r;
  int has_stabilizer;
  double stabilizer;
  const double* phi; /* per treatment, may be NULL */
  const double* gamma;
  size_t levels; /* length of phi and gamma */
} spw_nuisance;

SPW_API void spw_nuisance_init(spw_nuisance* nuis);
/* Residual value at one observation; tau is the hypothesised target. */
SPW_API spw_status spw_residual_eval(const spw_residual_kind* kind, double y, int w, double tau,
                                     const spw_nuisance* nuis, double* out);

typedef struct spw_check_report spw_check_report;

/* Runs the built-in probe suite, plus the given extra kinds (JSON strings). */
SPW_API spw_status spw_check_run(const char* const* extra_kinds, size_t count,
                                 spw_check_report** out);
SPW_API void spw_check_report_free(spw_check_report* report);
SPW_API int spw_check_all_as_expected(const spw_check_report* report);
SPW_API size_t spw_check_rows(const spw_check_report* report);
SPW_API spw_status spw_check_table(const spw_check_report* report, char* buf, size_t cap,
                                   size_t* needed);
SPW_API spw_status spw_check_json(const spw_check_report* report, char* buf, size_t cap,
                                  size_t* needed);

/* ---- large-sample estimation ------------------------------------------ */

typedef struct spw_fit spw_fit;

/* basis: term list such as "1,x,x^2". */
SPW_API spw_status spw_gpw_estimate(const spw_dataset* ds, const double* e, size_t n,
                                    const char* basis, double nu, spw_fit** out);
/* variant: robinson, half-weight, one-sided-control, overlap. */
SPW_API spw_status spw_alt_estimate(const spw_dataset* ds, const double* e, size_t n,
                                    const char* basis, const char* variant, spw_fit** out);
SPW_API void spw_fit_free(spw_fit* fit);
SPW_API size_t spw_fit_dim(const spw_fit* fit);
SPW_API size_t spw_fit_n(const spw_fit* fit);
SPW_API double spw_fit_nu(const spw_fit* fit);
SPW_API double spw_fit_condition(const spw_fit* fit);
SPW_API spw_status spw_fit_beta(const spw_fit* fit, double* out, size_t cap);
/* Row-major d x d asymptotic covariance of sqrt(n)(beta - beta0). */
SPW_API spw_status spw_fit_sigma(const spw_fit* fit, double* out, size_t cap);
SPW_API spw_status spw_fit_wald_ci(const spw_fit* fit, const double* contrast, double level,
                                   double* lo, double* hi);
/* Fit as JSON; with 0 < level < 1 per-coefficient Wald intervals are added. */
SPW_API spw_status spw_fit_json(const spw_fit* fit, double level, char* buf, size_t cap,
                                size_t* needed);

/* ---- finite-sample estimation ------------------------------------------ */

/* Arrays are indexed by treatment and have spw_dataset_levels() entries.
 * per_w_lo/per_w_hi may be NULL. */
SPW_API spw_status spw_fpw(const spw_dataset* ds, const double* bound_lo,
                           const double* bound_hi, const double* kappa, size_t levels,
                           double* lo, double* hi, double* per_w_lo, double* per_w_hi);
SPW_API spw_status spw_fpw_json(const spw_dataset* ds, const double* bound_lo,
                                const double* bound_hi, const double* kappa, size_t levels,
                                char* buf, size_t cap, size_t* needed);
SPW_API spw_status spw_wmd(const spw_dataset* ds, const double* kappa, size_t levels,
                           double* out);
SPW_API spw_status spw_ipw_fs(const spw_dataset* ds, const double* kappa, size_t levels,
                              double* out);
SPW_API spw_status spw_scaled_ate(const spw_dataset* ds, int a, int b, double* out);

/* ---- finite-sample inference ------------------------------------------- */

typedef struct spw_pvalues spw_pvalues;

typedef struct spw_test_config {
  const char* statistic; /* scaled_ate (default), wmd, ipw_fs */
  const char* grid;      /* "lo:hi:step" or comma list */
  const char* const* lambda_boxes; /* "k=LABEL:lo,hi" */
  size_t box_count;
  int resolution; /* points per lambda interval, default 5 */
  double c1;
  size_t draws;
  uint64_t seed;
  unsigned threads;
} spw_test_config;

SPW_API void spw_test_config_init(spw_test_config* cfg);
SPW_API spw_status spw_pvalue_bounds(const spw_dataset* ds, const spw_test_config* cfg,
                                     spw_pvalues** out);
SPW_API void spw_pvalues_free(spw_pvalues* pv);
SPW_API size_t spw_pvalues_size(const spw_pvalues* pv);
SPW_API spw_status spw_pvalues_get(const spw_pvalues* pv, double* grid, double* p_lo,
                                   double* p_hi, size_t cap);
SPW_API double spw_pvalues_observed(const spw_pvalues* pv);
/* Tbar,p_lo,p_hi table. */
SPW_API spw_status spw_pvalues_csv(const spw_pvalues* pv, char* buf, size_t cap,
                                   size_t* needed);
/* Metadata plus the confidence set at alpha. */
SPW_API spw_status spw_pvalues_json(const spw_pvalues* pv, double alpha, char* buf, size_t cap,
                                    size_t* needed);

/* ---- simulation -------------------------------------------------------- */

typedef struct spw_study spw_study;

/* JSON such as {"dgp":"finite","n":50,"reps":2000,"lambda":0.02,
 * "estimators":["fpw","ipw","wmd"],"seed":42,"threads":1}. */
SPW_API spw_status spw_simulate(const char* config_json, spw_study** out);
SPW_API void spw_study_free(spw_study* study);
SPW_API size_t spw_study_estimators(const spw_study* study);
SPW_API spw_status spw_study_json(const spw_study* study, char* buf, size_t cap,
                                  size_t* needed);
/* Per-replication estimates of estimator i as CSV. */
SPW_API spw_status spw_study_estimates_csv(const spw_study* study, size_t i, char* buf,
                                           size_t cap, size_t* needed);
/* Kernel density of column j of estimator i over `points` grid points. */
SPW_API spw_status spw_study_density_csv(const spw_study* study, size_t i, size_t j,
                                         size_t points, char* buf, size_t cap, size_t* needed);
SPW_API spw_status spw_study_label(const spw_study* study, size_t i, char* buf, size_t cap,
                                   size_t* needed);
SPW_API size_t spw_study_columns(const spw_study* study, size_t i);

#ifdef __cplusplus
}
#endif

#endif
