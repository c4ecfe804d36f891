#ifndef QJSD_H
#define QJSD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QjsdStatus {
  QJSD_STATUS_OK = 0,
  QJSD_STATUS_NULL_POINTER = 1,
  QJSD_STATUS_INVALID_ARGUMENT = 2,
  QJSD_STATUS_NOT_HERMITIAN = 3,
  QJSD_STATUS_INVALID_STATE = 4,
  QJSD_STATUS_DIMENSION_MISMATCH = 5,
  QJSD_STATUS_INVALID_HASHING = 6,
  QJSD_STATUS_RESOURCE_BUDGET = 7,
  QJSD_STATUS_DEGENERATE_CONDITIONING = 8,
  QJSD_STATUS_BUFFER_TOO_SMALL = 9,
  QJSD_STATUS_NON_FINITE = 10,
  QJSD_STATUS_INTERNAL = 11,
} QjsdStatus;

/**
 * Operator-valued distribution handle.
 */
typedef struct QjsdDistribution QjsdDistribution;

/**
 * Hashing handle.
 */
typedef struct QjsdHashing QjsdHashing;

/**
 * Observable handle.
 */
typedef struct QjsdOperator QjsdOperator;

/**
 * Density operator handle.
 */
typedef struct QjsdState QjsdState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *qjsd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qjsd_version(void);

/**
 * Hermitian `dim x dim` observable from row-major real and imaginary parts.
 *
 * # Safety
 * `re` and `im` must point to `dim * dim` doubles; `out` must be writable.
 */
enum QjsdStatus qjsd_operator_new(size_t dim,
                                  const double *re,
                                  const double *im,
                                  struct QjsdOperator **out);

/**
 * # Safety
 * `op` must be NULL or a handle from [`qjsd_operator_new`] not yet freed.
 */
void qjsd_operator_free(struct QjsdOperator *op);

/**
 * Density operator from a row-major matrix.
 *
 * # Safety
 * As for [`qjsd_operator_new`].
 */
enum QjsdStatus qjsd_state_new_density(size_t dim,
                                       const double *re,
                                       const double *im,
                                       struct QjsdState **out);

/**
 * Pure state `|psi><psi|`. A ket that is not normalised is rejected unless
 * `renormalize` is true.
 *
 * # Safety
 * `re` and `im` must point to `dim` doubles; `out` must be writable.
 */
enum QjsdStatus qjsd_state_new_ket(size_t dim,
                                   const double *re,
                                   const double *im,
                                   bool renormalize,
                                   struct QjsdState **out);

/**
 * # Safety
 * `state` must be NULL or a live state handle.
 */
void qjsd_state_free(struct QjsdState *state);

/**
 * Hashing preset: `kd`, `anti-kd`, `mh`, `alpha:<complex>` or `kappa:<real>`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum QjsdStatus qjsd_hashing_preset(const char *name, struct QjsdHashing **out);

/**
 * The alpha-family hashing for `alpha = re + i im`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QjsdStatus qjsd_hashing_alpha(double re, double im, struct QjsdHashing **out);

/**
 * # Safety
 * `hashing` must be NULL or a live hashing handle.
 */
void qjsd_hashing_free(struct QjsdHashing *hashing);

/**
 * Builds the distribution of `n_obs` observables, one per hashing axis.
 *
 * # Safety
 * `obs` must point to `n_obs` live operator handles; `out` must be writable.
 */
enum QjsdStatus qjsd_build(const struct QjsdHashing *hashing,
                           const struct QjsdOperator *const *obs,
                           size_t n_obs,
                           struct QjsdDistribution **out);

/**
 * # Safety
 * `dist` must be NULL or a live distribution handle.
 */
void qjsd_distribution_free(struct QjsdDistribution *dist);

/**
 * Number of support points; 0 for a NULL handle.
 *
 * # Safety
 * `dist` must be NULL or a live distribution handle.
 */
size_t qjsd_distribution_len(const struct QjsdDistribution *dist);

/**
 * Number of axes; 0 for a NULL handle.
 *
 * # Safety
 * `dist` must be NULL or a live distribution handle.
 */
size_t qjsd_distribution_n_axes(const struct QjsdDistribution *dist);

/**
 * Quasi-joint probabilities `Tr[W(x) rho]`, in support order. Writes
 * `len * n_axes` coordinates to `points` (row-major) and `len` values to
 * `re` / `im`. `capacity` is the number of support points the buffers hold.
 *
 * # Safety
 * Buffers must be writable for `capacity` points as described.
 */
enum QjsdStatus qjsd_classicalise(const struct QjsdDistribution *dist,
                                  const struct QjsdState *state,
                                  double *points,
                                  double *re,
                                  double *im,
                                  size_t capacity);

/**
 * Weak value `Tr[E_B(b) A rho] / Tr[E_B(b) rho]`.
 *
 * # Safety
 * Handles must be live; `re` and `im` must be writable.
 */
enum QjsdStatus qjsd_weak_value(const struct QjsdOperator *a,
                                const struct QjsdOperator *b,
                                double b_value,
                                const struct QjsdState *state,
                                double threshold,
                                double *re,
                                double *im);

/**
 * Rank of the quasi-classicalisation map; full rank `dim^2` means faithful.
 *
 * # Safety
 * `dist` must be live; `rank` must be writable.
 */
enum QjsdStatus qjsd_faithfulness_rank(const struct QjsdDistribution *dist, size_t *rank);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QJSD_H */
