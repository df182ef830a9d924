#ifndef TREECAL_H
#define TREECAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TcDomainKind {
  /**
   * Probability simplex in `d` coordinates; `a` and `b` are ignored.
   */
  TC_DOMAIN_KIND_SIMPLEX = 0,
  /**
   * Euclidean ball of radius `a`.
   */
  TC_DOMAIN_KIND_L2_BALL = 1,
  /**
   * L1 ball of radius `a`.
   */
  TC_DOMAIN_KIND_L1_BALL = 2,
  /**
   * Box `[a, b]^d`.
   */
  TC_DOMAIN_KIND_BOX = 3,
} TcDomainKind;

typedef enum TcNorm {
  TC_NORM_L1 = 0,
  TC_NORM_L2 = 1,
  TC_NORM_L_INF = 2,
} TcNorm;

typedef enum TcRegularizer {
  TC_REGULARIZER_EUCLIDEAN = 0,
  TC_REGULARIZER_NEGATIVE_ENTROPY = 1,
} TcRegularizer;

/**
 * Result of every fallible call.
 */
typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_NULL_POINTER = 1,
  /**
   * A point lies outside the domain, or a length or dimension does not match.
   */
  TC_STATUS_DOMAIN = 2,
  /**
   * Invalid tree parameters or domain description.
   */
  TC_STATUS_CONFIG = 3,
  /**
   * `forecast` and `observe` were called out of order or past the horizon.
   */
  TC_STATUS_PROTOCOL = 4,
  /**
   * The caller's buffer cannot hold the result; the required size was written.
   */
  TC_STATUS_BUFFER_TOO_SMALL = 5,
  TC_STATUS_UNSUPPORTED = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  TC_STATUS_INTERNAL = 7,
} TcStatus;

/**
 * A TreeCal forecaster together with the transcript of the rounds played so far.
 */
typedef struct TcTreeCal TcTreeCal;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tc_last_error(void);

/**
 * Creates a TreeCal forecaster with arity `arity`, depth `depth` and horizon `horizon`
 * over the given domain, writing the handle to `*out`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum TcStatus tc_treecal_new(enum TcDomainKind kind,
                             size_t d,
                             double a,
                             double b,
                             size_t horizon,
                             size_t arity,
                             size_t depth,
                             struct TcTreeCal **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle from [`tc_treecal_new`] not yet freed.
 */
void tc_treecal_free(struct TcTreeCal *h);

/**
 * Dimension of the handle's domain, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tc_treecal_dim(const struct TcTreeCal *h);

/**
 * Maximum number of atoms in a forecast (the tree depth), or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tc_treecal_max_atoms(const struct TcTreeCal *h);

/**
 * Forecast for round `t` (1-based). Atom `i` is written to `points[i*d..(i+1)*d]` and
 * `weights[i]`. When `labels` is non-null, its node digits go to
 * `labels[i*depth..]` and their count to `label_lens[i]`. The atom count is written to
 * `*n_atoms`; if it exceeds `capacity`, nothing else is written,
 * `TC_STATUS_BUFFER_TOO_SMALL` is returned and the call may be repeated for the same round.
 *
 * # Safety
 * `points` must hold `capacity * d` doubles, `weights` `capacity` doubles, and, when
 * non-null, `labels` `capacity * depth` integers and `label_lens` `capacity` entries.
 */
enum TcStatus tc_treecal_forecast(struct TcTreeCal *h,
                                  size_t t,
                                  double *points,
                                  double *weights,
                                  uint32_t *labels,
                                  size_t *label_lens,
                                  size_t capacity,
                                  size_t *n_atoms);

/**
 * Reveals the outcome `y` (length `d`) of round `t`.
 *
 * # Safety
 * `h` must be a live handle and `y` must point to `d` readable doubles.
 */
enum TcStatus tc_treecal_observe(struct TcTreeCal *h, size_t t, const double *y);

/**
 * Number of completed rounds, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tc_treecal_rounds(const struct TcTreeCal *h);

/**
 * Calibration error of the completed rounds under `norm` (squared when `squared` is
 * nonzero), grouping atoms by node label as well as point when `labeled` is nonzero.
 *
 * # Safety
 * `h` must be a live handle and `out` a writable double.
 */
enum TcStatus tc_treecal_calibration(const struct TcTreeCal *h,
                                     enum TcNorm norm,
                                     bool squared,
                                     bool labeled,
                                     double *out);

/**
 * Calibration error under the Bregman divergence of `reg`; with `labeled` this is the
 * full swap regret of the forecasts.
 *
 * # Safety
 * `h` must be a live handle and `out` a writable double.
 */
enum TcStatus tc_treecal_bregman_calibration(const struct TcTreeCal *h,
                                             enum TcRegularizer reg,
                                             bool labeled,
                                             double *out);

/**
 * `D_R(y | p)` for vectors of length `d`.
 *
 * # Safety
 * `y` and `p` must point to `d` readable doubles and `out` to a writable double.
 */
enum TcStatus tc_bregman(enum TcRegularizer reg,
                         const double *y,
                         const double *p,
                         size_t d,
                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREECAL_H */
