#ifndef RSTAT_H
#define RSTAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RstatFamily {
  RSTAT_FAMILY_GAUSSIAN = 0,
  RSTAT_FAMILY_UNIFORM = 1,
  RSTAT_FAMILY_STUDENT_T = 2,
  RSTAT_FAMILY_EXPONENTIAL = 3,
} RstatFamily;

typedef enum RstatAlternative {
  RSTAT_ALTERNATIVE_TWO_SIDED = 0,
  RSTAT_ALTERNATIVE_GREATER = 1,
  RSTAT_ALTERNATIVE_LESS = 2,
} RstatAlternative;

typedef enum RstatEqualize {
  RSTAT_EQUALIZE_TRIM = 0,
  RSTAT_EQUALIZE_RESAMPLE = 1,
} RstatEqualize;

typedef enum RstatStatus {
  RSTAT_STATUS_OK = 0,
  RSTAT_STATUS_NULL_POINTER = 1,
  RSTAT_STATUS_INVALID_INPUT = 2,
  RSTAT_STATUS_DEGENERATE = 3,
  RSTAT_STATUS_TABLE_MISMATCH = 4,
  RSTAT_STATUS_NON_CONVERGENCE = 5,
  RSTAT_STATUS_FORMAT = 6,
  RSTAT_STATUS_IO = 7,
  RSTAT_STATUS_PANIC = 8,
} RstatStatus;

typedef enum RstatVariant {
  RSTAT_VARIANT_SINGLE_R0 = 0,
  RSTAT_VARIANT_RZ_PAIRED = 1,
  RSTAT_VARIANT_RZ_UNPAIRED = 2,
  RSTAT_VARIANT_RPLUS2 = 3,
  RSTAT_VARIANT_RMINUS2 = 4,
  RSTAT_VARIANT_RD = 5,
} RstatVariant;

/**
 * Opaque null table.
 */
typedef struct RstatNull RstatNull;

/**
 * Data law; `nu` is ignored unless `family` is Student-t.
 */
typedef struct RstatDistribution {
  enum RstatFamily family;
  double theta;
  double sigma;
  double nu;
} RstatDistribution;

typedef struct RstatSigmaParams {
  double a;
  double b;
  double c;
} RstatSigmaParams;

typedef struct RstatTestConfig {
  size_t p_perms;
  size_t m_draws;
  enum RstatAlternative alternative;
  enum RstatEqualize equalize;
  uint64_t seed;
  uint64_t stream;
  /**
   * Borrowed prebuilt null table, or NULL to build one per call.
   */
  const struct RstatNull *null_table;
  struct RstatDistribution generator;
  struct RstatSigmaParams sigma;
} RstatTestConfig;

typedef struct RstatPermEstimate {
  double mean_r0;
  double mean_r_plus;
  double mean_r_minus;
  /**
   * NaN when `p == 1`.
   */
  double std_err;
  size_t p;
  uint64_t ties_seen;
} RstatPermEstimate;

typedef struct RstatTestResult {
  double statistic;
  double raw;
  /**
   * NaN when no normalisation applies.
   */
  double normalized;
  double p_value;
  size_t n_x;
  /**
   * 0 for single-sample tests.
   */
  size_t n_y;
  size_t p_perms;
  size_t m_draws;
  uint64_t ties_seen;
  bool parametric;
} RstatTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *rstat_last_error(void);

/**
 * Standard Gaussian with `theta = 0`.
 */
struct RstatDistribution rstat_distribution_default(void);

struct RstatSigmaParams rstat_sigma_params_default(void);

/**
 * Library defaults: 10^4 permutations and draws, two-sided, trim, seed 0,
 * Gaussian generator, no cached table.
 */
struct RstatTestConfig rstat_test_config_default(void);

/**
 * `R_0` of the cumulative sum of `values[0..n]`.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be writable.
 */
enum RstatStatus rstat_r0_of_sample(const double *values, size_t n, int32_t *out);

/**
 * Averages of `R_0`, `R_+`, `R_-` over `p` random permutations.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be writable.
 */
enum RstatStatus rstat_mean_record_counts(const double *values,
                                          size_t n,
                                          size_t p,
                                          uint64_t seed,
                                          uint64_t stream,
                                          struct RstatPermEstimate *out);

/**
 * `sigma_N` for walks of length `n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RstatStatus rstat_sigma_n(size_t n, struct RstatSigmaParams params, double *out);

/**
 * Exact probabilities of `R = 1..=n_steps + 1` upper records (origin
 * included) into `out[0..=n_steps]`; `out_len` must be at least
 * `n_steps + 1`.
 *
 * # Safety
 * `out` must point to `out_len` writable doubles.
 */
enum RstatStatus rstat_exact_record_pmf(size_t n_steps, double *out, size_t out_len);

/**
 * Single-sample r-test.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `cfg` must be valid (its
 * `null_table` NULL or a live handle); `out` must be writable.
 */
enum RstatStatus rstat_r_test_single(const double *values,
                                     size_t n,
                                     const struct RstatTestConfig *cfg,
                                     struct RstatTestResult *out);

/**
 * Two-sample test of the given variant (not `SINGLE_R0`).
 *
 * # Safety
 * `x` and `y` must point to `nx` and `ny` readable doubles; `cfg` and `out`
 * as for [`rstat_r_test_single`].
 */
enum RstatStatus rstat_r_test_two(const double *x,
                                  size_t nx,
                                  const double *y,
                                  size_t ny,
                                  enum RstatVariant variant,
                                  const struct RstatTestConfig *cfg,
                                  struct RstatTestResult *out);

/**
 * Build a null table. `n_y` and `equalize` are ignored for `SINGLE_R0`;
 * `generator` may be NULL for the standard Gaussian.
 *
 * # Safety
 * `generator` must be NULL or valid; `out` must be writable. The handle
 * written to `*out` must be released with [`rstat_null_free`].
 */
enum RstatStatus rstat_null_build(enum RstatVariant variant,
                                  size_t n,
                                  size_t n_y,
                                  enum RstatEqualize equalize,
                                  size_t p_perms,
                                  const struct RstatDistribution *generator,
                                  size_t m_draws,
                                  uint64_t seed,
                                  uint64_t stream,
                                  struct RstatNull **out);

/**
 * Load a table written by [`rstat_null_save`] or the command-line tool.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RstatStatus rstat_null_load(const char *path, struct RstatNull **out);

/**
 * # Safety
 * `table` must be a live handle; `path` a NUL-terminated string.
 */
enum RstatStatus rstat_null_save(const struct RstatNull *table, const char *path);

/**
 * Number of draws in the table, or 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t rstat_null_len(const struct RstatNull *table);

/**
 * Monte Carlo p-value of `observed` against the table.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum RstatStatus rstat_null_p_value(const struct RstatNull *table,
                                    double observed,
                                    enum RstatAlternative alternative,
                                    double *out);

/**
 * Release a table; NULL is a no-op.
 *
 * # Safety
 * `table` must be NULL or a handle not yet freed.
 */
void rstat_null_free(struct RstatNull *table);

/**
 * One-sample t statistic.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be writable.
 */
enum RstatStatus rstat_t_statistic(const double *values, size_t n, double *out);

/**
 * `#{x > 0} - #{x < 0}`.
 *
 * # Safety
 * As for [`rstat_t_statistic`].
 */
enum RstatStatus rstat_sign_statistic(const double *values, size_t n, double *out);

/**
 * Wilcoxon signed-rank sum.
 *
 * # Safety
 * As for [`rstat_t_statistic`].
 */
enum RstatStatus rstat_wilcoxon_signed_rank(const double *values, size_t n, double *out);

/**
 * Centered Mann-Whitney U.
 *
 * # Safety
 * `x`, `y` must point to `nx`, `ny` readable doubles; `out` must be writable.
 */
enum RstatStatus rstat_mann_whitney_u(const double *x,
                                      size_t nx,
                                      const double *y,
                                      size_t ny,
                                      double *out);

/**
 * Welch's t.
 *
 * # Safety
 * As for [`rstat_mann_whitney_u`].
 */
enum RstatStatus rstat_welch_t(const double *x, size_t nx, const double *y, size_t ny, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RSTAT_H */
