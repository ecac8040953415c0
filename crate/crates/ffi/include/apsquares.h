#ifndef APSQUARES_H
#define APSQUARES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApsqCharacter {
  APSQ_CHARACTER_CHI8 = 0,
  APSQ_CHARACTER_CHI4 = 1,
  APSQ_CHARACTER_PRINCIPAL8 = 2,
} ApsqCharacter;

typedef enum ApsqRegionKind {
  APSQ_REGION_KIND_RATIO = 0,
  APSQ_REGION_KIND_MAX = 1,
  APSQ_REGION_KIND_RECT = 2,
  APSQ_REGION_KIND_PRODUCT = 3,
} ApsqRegionKind;

typedef enum ApsqStatus {
  APSQ_STATUS_OK = 0,
  APSQ_STATUS_NULL_POINTER = 1,
  APSQ_STATUS_DOMAIN = 2,
  APSQ_STATUS_POLE = 3,
  APSQ_STATUS_OVERFLOW = 4,
  APSQ_STATUS_BOUND_TOO_LARGE = 5,
  APSQ_STATUS_FACTORIZATION_BUDGET = 6,
  APSQ_STATUS_NOT_PRIME = 7,
  APSQ_STATUS_INDEX_OUT_OF_RANGE = 8,
  APSQ_STATUS_PANIC = 9,
} ApsqStatus;

typedef enum ApsqTheorem {
  APSQ_THEOREM_RATL_POINTS = 0,
  APSQ_THEOREM_BOUNDED_MAX = 1,
  APSQ_THEOREM_NATURAL_XY = 2,
  APSQ_THEOREM_FIRST_TWO = 3,
} ApsqTheorem;

/**
 * Opaque list of Pell solutions `(c, b)`.
 */
typedef struct ApsqPell ApsqPell;

/**
 * Opaque scan result.
 */
typedef struct ApsqScan ApsqScan;

/**
 * A counting region. `delta_num/delta_den` is read for `Ratio`, `y` for `Rect`.
 */
typedef struct ApsqRegion {
  enum ApsqRegionKind kind;
  uint64_t x;
  uint64_t delta_num;
  uint64_t delta_den;
  uint64_t y;
} ApsqRegion;

typedef struct ApsqIdentityReport {
  double lhs;
  double rhs;
  double abs_diff;
  double rel_diff;
  double lhs_tail;
  double rhs_tail;
  double tolerance;
  bool pass;
} ApsqIdentityReport;

/**
 * Parameters of a scan. For `NaturalXy`, `Y = floor(X^(y_exp_num / y_exp_den))`.
 */
typedef struct ApsqScanParams {
  enum ApsqTheorem theorem;
  uint64_t delta_num;
  uint64_t delta_den;
  uint32_t y_exp_num;
  uint32_t y_exp_den;
  bool include_trivial;
  /**
   * Worker threads; 0 picks the number of cores.
   */
  uint32_t threads;
} ApsqScanParams;

typedef struct ApsqCountRow {
  uint64_t x;
  /**
   * Ratio bound for `RatlPoints`, 0/1 otherwise.
   */
  uint64_t delta_num;
  uint64_t delta_den;
  /**
   * Rectangle height for `NaturalXy`, 0 otherwise.
   */
  uint64_t y;
  uint64_t count;
  double main_term;
  double abs_error;
  double rel_error;
  uint64_t elapsed_ms;
} ApsqCountRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *apsq_version(void);

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL, or 0
 * when there is no error.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t apsq_last_error_message(char *buf, size_t len);

/**
 * Number of representations of `n` as a sum of two squares.
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum ApsqStatus apsq_r2(uint64_t n, uint64_t *out);

/**
 * Hecke eigenvalue `lambda_m(n)`.
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum ApsqStatus apsq_lambda(uint64_t n, int64_t m, double *out);

/**
 * `L(s, chi)` for `s > 0`.
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum ApsqStatus apsq_dirichlet_l(double s, enum ApsqCharacter chi, double *out);

/**
 * `L(s, eta^m2)` truncated at `prime_bound`; `tail` may be null.
 *
 * # Safety
 * `out` must be valid; `tail` must be null or valid.
 */
enum ApsqStatus apsq_hecke_l(double s, int64_t m2, uint64_t prime_bound, double *out, double *tail);

/**
 * Exact number of APs in `region`. `threads = 0` uses every core.
 *
 * # Safety
 * `region` and `out` must be valid pointers.
 */
enum ApsqStatus apsq_count_region(const struct ApsqRegion *region,
                                  bool include_trivial,
                                  uint32_t threads,
                                  uint64_t *out);

/**
 * Closed-form main term of the count in `region`.
 *
 * # Safety
 * `region` and `out` must be valid pointers.
 */
enum ApsqStatus apsq_main_term(const struct ApsqRegion *region, double *out);

/**
 * Both sides of the single-series identity at `(h, s)`. `b_max = 0` selects
 * the default orbit cutoff.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ApsqStatus apsq_verify_single(uint64_t h,
                                   double s,
                                   double tolerance,
                                   uint32_t m_max,
                                   uint64_t b_max,
                                   struct ApsqIdentityReport *out);

/**
 * Both sides of the double-series identity at `(s, w)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ApsqStatus apsq_verify_double(double s,
                                   double w,
                                   double tolerance,
                                   uint64_t h_max,
                                   uint32_t m_max,
                                   uint64_t prime_bound,
                                   struct ApsqIdentityReport *out);

/**
 * Count along `grid` and compare with the main term. Release the handle with
 * [`apsq_scan_free`].
 *
 * # Safety
 * `params` and `out` must be valid; `grid` must hold `grid_len` values.
 */
enum ApsqStatus apsq_scan_new(const struct ApsqScanParams *params,
                              const uint64_t *grid,
                              size_t grid_len,
                              struct ApsqScan **out);

/**
 * Number of rows in a scan; 0 for a null handle.
 *
 * # Safety
 * `scan` must be null or a live handle from [`apsq_scan_new`].
 */
size_t apsq_scan_len(const struct ApsqScan *scan);

/**
 * Copy row `index` of a scan.
 *
 * # Safety
 * `scan` must be a live handle and `out` a valid pointer.
 */
enum ApsqStatus apsq_scan_row(const struct ApsqScan *scan, size_t index, struct ApsqCountRow *out);

/**
 * Release a scan. Null is ignored.
 *
 * # Safety
 * `scan` must be null or a handle from [`apsq_scan_new`] not freed before.
 */
void apsq_scan_free(struct ApsqScan *scan);

/**
 * Solutions of `c^2 - 2 b^2 = -h` with `c >= 0` and `b <= b_max`, sorted by
 * `b`. Release with [`apsq_pell_free`].
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ApsqStatus apsq_pell_new(uint64_t h, uint64_t b_max, struct ApsqPell **out);

/**
 * Number of solutions held; 0 for a null handle.
 *
 * # Safety
 * `pell` must be null or a live handle from [`apsq_pell_new`].
 */
size_t apsq_pell_len(const struct ApsqPell *pell);

/**
 * Solution `index` as `(c, b)`.
 *
 * # Safety
 * `pell` must be a live handle; `c` and `b` valid pointers.
 */
enum ApsqStatus apsq_pell_get(const struct ApsqPell *pell, size_t index, uint64_t *c, uint64_t *b);

/**
 * Release a Pell handle. Null is ignored.
 *
 * # Safety
 * `pell` must be null or a handle from [`apsq_pell_new`] not freed before.
 */
void apsq_pell_free(struct ApsqPell *pell);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APSQUARES_H */
