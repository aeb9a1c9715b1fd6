/* C interface to the bisectnet decentralized bisection-search simulator. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BnStatus {
  BnStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  BnStatus_NullPointer = 1,
  /**
   * A numeric argument violated its documented range.
   */
  BnStatus_InvalidArgument = 2,
  /**
   * The query point was not the median of the belief.
   */
  BnStatus_NotMedian = 3,
  /**
   * The configuration document failed to parse or validate.
   */
  BnStatus_InvalidConfig = 4,
  /**
   * The run failed (I/O, topology generation, or invariant violation).
   */
  BnStatus_RunFailed = 5,
  /**
   * The input string was not valid UTF-8.
   */
  BnStatus_InvalidUtf8 = 6,
} BnStatus;

/**
 * Opaque posterior-density handle.
 */
typedef struct BnBelief BnBelief;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread. The pointer stays valid
 * until the next failing call on the same thread; do not free it.
 */
const char *bn_last_error_message(void);

/**
 * Creates the uniform prior over the unit interval. Never fails.
 * Free with [`bn_belief_free`].
 */
struct BnBelief *bn_belief_uniform(void);

/**
 * Builds a belief from `n_breakpoints` ordered positions (first 0, last 1)
 * and `n_breakpoints - 1` nonnegative densities; the density is
 * renormalized to unit mass.
 *
 * # Safety
 * `breakpoints` must point to `n_breakpoints` readable doubles, `values`
 * to `n_values` readable doubles, and `out` must be a valid destination.
 */
enum BnStatus bn_belief_from_segments(const double *breakpoints,
                                      uintptr_t n_breakpoints,
                                      const double *values,
                                      uintptr_t n_values,
                                      struct BnBelief **out);

/**
 * # Safety
 * `belief` must be a live handle from this library and `out` valid.
 */
enum BnStatus bn_belief_clone(const struct BnBelief *belief, struct BnBelief **out);

/**
 * Releases a handle returned by this library. Null is ignored.
 *
 * # Safety
 * `belief` must be a live handle from this library, not yet freed.
 */
void bn_belief_free(struct BnBelief *belief);

/**
 * Number of constant-density segments.
 *
 * # Safety
 * `belief` must be a live handle and `out` valid.
 */
enum BnStatus bn_belief_segment_count(const struct BnBelief *belief, uintptr_t *out);

/**
 * Cumulative mass of `[0, x]`.
 *
 * # Safety
 * `belief` must be a live handle and `out` valid.
 */
enum BnStatus bn_belief_cdf(const struct BnBelief *belief, double x, double *out);

/**
 * Leftmost position carrying cumulative mass `u`.
 *
 * # Safety
 * `belief` must be a live handle and `out` valid.
 */
enum BnStatus bn_belief_quantile(const struct BnBelief *belief, double u, double *out);

/**
 * First moment of the density.
 *
 * # Safety
 * `belief` must be a live handle and `out` valid.
 */
enum BnStatus bn_belief_mean(const struct BnBelief *belief, double *out);

/**
 * Density at `x` (right-continuous at breakpoints).
 *
 * # Safety
 * `belief` must be a live handle and `out` valid.
 */
enum BnStatus bn_belief_density_at(const struct BnBelief *belief, double x, double *out);

/**
 * Bisection Bayes update for binary response `y` (0 or 1) observed through
 * a symmetric channel with crossover `eps`; `x_hat` must be the median of
 * the belief. Writes a new handle to `out`.
 *
 * # Safety
 * `belief` must be a live handle and `out` valid.
 */
enum BnStatus bn_belief_bayes_update(const struct BnBelief *belief,
                                     int32_t y,
                                     double eps,
                                     double x_hat,
                                     struct BnBelief **out);

/**
 * Pointwise convex combination `alpha * updated + (1 - alpha) * other`.
 *
 * # Safety
 * Both handles must be live and `out` valid.
 */
enum BnStatus bn_belief_mix(double alpha,
                            const struct BnBelief *updated,
                            const struct BnBelief *other,
                            struct BnBelief **out);

/**
 * Capacity in bits of a binary symmetric channel, `eps` in `[0, 0.5]`.
 *
 * # Safety
 * `out` must be a valid destination.
 */
enum BnStatus bn_bsc_capacity(double eps, double *out);

/**
 * Response likelihood `f_1(y)` below the query point, `f_0(y)` above it.
 *
 * # Safety
 * `out` must be a valid destination.
 */
enum BnStatus bn_bsc_likelihood(int32_t y, double x, double x_hat, double eps, double *out);

/**
 * Coefficient of ergodicity of a row-major `m x m` row-stochastic matrix:
 * half the maximum L1 distance between rows.
 *
 * # Safety
 * `entries` must point to `m * m` readable doubles and `out` be valid.
 */
enum BnStatus bn_tau1(const double *entries, uintptr_t m, double *out);

/**
 * Parses a configuration document and runs the configured experiments,
 * writing CSV files into the configured output directory.
 *
 * # Safety
 * `config_text` must be a valid NUL-terminated string.
 */
enum BnStatus bn_run_experiment(const char *config_text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
