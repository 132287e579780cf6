#ifndef DFCALC_H
#define DFCALC_H

/* Generated by cbindgen from dfcalc-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every FFI call.
 */
typedef enum DfcStatus {
  DFC_STATUS_OK = 0,
  DFC_STATUS_NULL_ARGUMENT = 1,
  DFC_STATUS_INVALID_ARGUMENT = 2,
  DFC_STATUS_DOMAIN_ERROR = 3,
  DFC_STATUS_UNDEFINED_FORM = 4,
  DFC_STATUS_SINGULAR_SYSTEM = 5,
  DFC_STATUS_NO_CONVERGENCE = 6,
} DfcStatus;

/**
 * Opaque grid function over doubles: `len` values at `base, base+1, ...`.
 */
typedef struct DfcGridFn DfcGridFn;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the message of the most recent failure on this thread into `buf`
 * (NUL-terminated, truncated to `cap`). Returns the full message length.
 *
 * # Safety
 * `buf` must be valid for `cap` writable bytes (or `cap` may be 0).
 */
uintptr_t dfc_last_error(char *buf, uintptr_t cap);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *dfc_version(void);

/**
 * Create a grid function from `len` values starting at `base`.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum DfcStatus dfc_gridfn_new(double base,
                              const double *values,
                              uintptr_t len,
                              struct DfcGridFn **out);

/**
 * Release a handle created by this library. Null is ignored.
 *
 * # Safety
 * `f` must be a pointer previously returned by this library, or null.
 */
void dfc_gridfn_free(struct DfcGridFn *f);

/**
 * Number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `f` must be a valid handle or null.
 */
uintptr_t dfc_gridfn_len(const struct DfcGridFn *f);

/**
 * Smallest grid point (NaN for a null handle).
 *
 * # Safety
 * `f` must be a valid handle or null.
 */
double dfc_gridfn_base(const struct DfcGridFn *f);

/**
 * Copy the values into `out` (which must hold at least `len` doubles).
 *
 * # Safety
 * `f` must be a valid handle; `out` must be writable for `cap` doubles.
 */
enum DfcStatus dfc_gridfn_values(const struct DfcGridFn *f, double *out, uintptr_t cap);

/**
 * Apply a fractional operator (`{delta|nabla}-{left|right}-{sum|rl|caputo}`)
 * of order `alpha` anchored at `anchor` to `f`, producing a new handle.
 *
 * # Safety
 * `op` must be NUL-terminated; `f` a valid handle; `out` writable.
 */
enum DfcStatus dfc_apply(const char *op,
                         double alpha,
                         double anchor,
                         const struct DfcGridFn *f,
                         struct DfcGridFn **out);

/**
 * Check one operator identity on `f` with the exact rational backend
 * (`alpha = alpha_num / alpha_den`; `p` parameterizes the p-indexed
 * identities). `exact_pass` is 1 iff the deviation is exactly zero;
 * `max_dev` receives the deviation rounded to the nearest double.
 *
 * # Safety
 * Pointer arguments must be valid as for the other entry points.
 */
enum DfcStatus dfc_check_identity(const char *id,
                                  int64_t alpha_num,
                                  int64_t alpha_den,
                                  uint32_t p,
                                  const struct DfcGridFn *f,
                                  double *max_dev,
                                  uintptr_t *points_checked,
                                  int32_t *exact_pass);

/**
 * Evaluate one summation-by-parts theorem
 * (`SBP_{CAPUTO|RL}_{LEFT|RIGHT}`) on `f`, `g` with the exact backend.
 *
 * # Safety
 * Pointer arguments must be valid as for the other entry points.
 */
enum DfcStatus dfc_sbp(const char *theorem,
                       int64_t alpha_num,
                       int64_t alpha_den,
                       const struct DfcGridFn *f,
                       const struct DfcGridFn *g,
                       double *lhs,
                       double *rhs_boundary,
                       double *rhs_sum,
                       double *deviation,
                       int32_t *exact_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DFCALC_H */
