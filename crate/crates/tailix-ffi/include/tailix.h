#ifndef TAILIX_H
#define TAILIX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>
typedef struct TailixConfig TailixConfig;

/**
 * Estimator selector.
 */
typedef enum TailixEstimator {
  /**
   * Mean of the top-k log excesses (positive tails only).
   */
  TailixEstimator_Hill = 0,
  /**
   * Maximum likelihood under the exponential regression model.
   */
  TailixEstimator_Mb = 1,
  /**
   * Minimum density power divergence under the same model.
   */
  TailixEstimator_MdpdeEr = 2,
  /**
   * Divergence fit of an exponential to the log excesses.
   */
  TailixEstimator_MdpdeKl = 3,
} TailixEstimator;

/**
 * Result codes for every entry point.
 */
typedef enum TailixStatus {
  TailixStatus_Ok = 0,
  /**
   * Null pointer, non-finite argument, or parameter out of domain.
   */
  TailixStatus_InvalidArgument = 1,
  /**
   * Tied top order statistics make the transform degenerate.
   */
  TailixStatus_Tie = 2,
  /**
   * Not enough observations for the requested number of extremes.
   */
  TailixStatus_Size = 3,
  /**
   * The threshold order statistic is not strictly positive.
   */
  TailixStatus_Positivity = 4,
  /**
   * The minimizer hit its iteration cap; estimate outputs hold the best
   * scan point.
   */
  TailixStatus_NonConvergence = 5,
  /**
   * Numerical integration did not converge (divergent parameter corner).
   */
  TailixStatus_QuadratureFailure = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  TailixStatus_Panic = 7,
} TailixStatus;

/**
 * One fit result.
 */
typedef struct TailixEstimate {
  double gamma_hat;
  double objective;
  uintptr_t n_roots_found;
  bool converged;
  enum TailixEstimator estimator;
} TailixEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tailix_version(void);

/**
 * New config with the defaults alpha = 0.3, k = 225, search interval
 * [-5, 5], 201 scan points, tolerance 1e-8. Free with `tailix_config_free`.
 */
TailixConfig *tailix_config_new(void);

/**
 * Release a config handle. A null pointer is a no-op.
 *
 * # Safety
 * `cfg` must come from `tailix_config_new` and not be freed twice.
 */
void tailix_config_free(TailixConfig *cfg);

/**
 * Set the divergence tuning parameter (alpha >= 0).
 *
 * # Safety
 * `cfg` must be a live handle from `tailix_config_new`.
 */
enum TailixStatus tailix_config_set_alpha(TailixConfig *cfg, double value);

/**
 * Set the number of extreme order statistics (k >= 2).
 *
 * # Safety
 * `cfg` must be a live handle from `tailix_config_new`.
 */
enum TailixStatus tailix_config_set_k(TailixConfig *cfg, uintptr_t value);

/**
 * Set the number of coarse scan points (>= 3).
 *
 * # Safety
 * `cfg` must be a live handle from `tailix_config_new`.
 */
enum TailixStatus tailix_config_set_grid_points(TailixConfig *cfg, uintptr_t value);

/**
 * Set the refinement tolerance on gamma (> 0).
 *
 * # Safety
 * `cfg` must be a live handle from `tailix_config_new`.
 */
enum TailixStatus tailix_config_set_tol(TailixConfig *cfg, double value);

/**
 * Set the gamma search interval (lo < hi).
 *
 * # Safety
 * `cfg` must be a live handle from `tailix_config_new`.
 */
enum TailixStatus tailix_config_set_search(TailixConfig *cfg, double lo, double hi);

/**
 * Estimate the tail index of `data[0..len]` with the chosen estimator.
 * On `NonConvergence` the output still holds the best scan point.
 *
 * # Safety
 * `data` must point to `len` readable f64 values; `out` must be writable;
 * `cfg` must be a live handle (null means defaults).
 */
enum TailixStatus tailix_estimate(const double *data,
                                  uintptr_t len,
                                  enum TailixEstimator estimator,
                                  const TailixConfig *cfg,
                                  struct TailixEstimate *out);

/**
 * Fixed-sample influence of contamination at `t0` in direction `j0`
 * (1 <= j0 <= k-1) for the divergence estimator.
 *
 * # Safety
 * `out` must be writable.
 */
enum TailixStatus tailix_influence_single(double t0,
                                          uintptr_t j0,
                                          uintptr_t k,
                                          double gamma,
                                          double alpha,
                                          double *out);

/**
 * Gross-error sensitivity (supremum of |influence| over the contamination
 * point); +infinity at alpha = 0.
 *
 * # Safety
 * `out` must be writable.
 */
enum TailixStatus tailix_gross_error_sensitivity(uintptr_t j0,
                                                 uintptr_t k,
                                                 double gamma,
                                                 double alpha,
                                                 double *out);

/**
 * Asymptotic variance pieces of the scaled estimator: the curvature
 * functional `a`, the score variance `sigma2`, and `sigma2 / a^2`.
 * Fails with `QuadratureFailure` where the defining integrals diverge.
 *
 * # Safety
 * The three output pointers must be writable.
 */
enum TailixStatus tailix_asymptotic_variance(double gamma,
                                             double alpha,
                                             double *out_a,
                                             double *out_sigma2,
                                             double *out_variance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAILIX_H */
