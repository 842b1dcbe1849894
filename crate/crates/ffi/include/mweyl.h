#ifndef MWEYL_H
#define MWEYL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of a call. Zero is success.
 */
typedef enum {
  MWEYL_STATUS_OK = 0,
  MWEYL_STATUS_NULL_POINTER = 1,
  MWEYL_STATUS_INVALID_INPUT = 2,
  MWEYL_STATUS_NEAR_POLE = 3,
  MWEYL_STATUS_ESSENTIAL_SPECTRUM = 4,
  MWEYL_STATUS_BUFFER_TOO_SMALL = 5,
  MWEYL_STATUS_NUMERICAL = 6,
  MWEYL_STATUS_PANIC = 7,
} MweylStatus;

/**
 * Opaque pair `(y, z)` of functions on [0, 1].
 */
typedef struct MweylPair MweylPair;

/**
 * Opaque Hain-Lust problem.
 */
typedef struct MweylProblem MweylProblem;

/**
 * Solver tolerances and guards.
 */
typedef struct {
  double rtol;
  double atol;
  double quad_tol;
  double quad_rel_tol;
  size_t panel_budget;
  double eps_sing;
  double condition_cap;
} MweylSettings;

/**
 * A complex number laid out as two doubles.
 */
typedef struct {
  double re;
  double im;
} MweylComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *mweyl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mweyl_version(void);

/**
 * Default solver settings.
 */
MweylSettings mweyl_settings_default(void);

/**
 * Creates a problem with separated conditions given by the angles `alpha`
 * (at x = 0) and `beta` (at x = 1).
 */
MweylStatus mweyl_problem_new_angles(const char *q,
                                     const char *w,
                                     const char *u,
                                     double alpha,
                                     double beta,
                                     MweylProblem **problem);

/**
 * Creates a problem with boundary matrix `b`, four entries in row-major order.
 */
MweylStatus mweyl_problem_new_matrix(const char *q,
                                     const char *w,
                                     const char *u,
                                     const MweylComplex *b,
                                     MweylProblem **problem);

/**
 * Replaces the solver settings of a problem.
 */
MweylStatus mweyl_problem_set_settings(MweylProblem *problem, MweylSettings settings);

/**
 * Releases a problem. Null is ignored.
 */
void mweyl_problem_free(MweylProblem *problem);

/**
 * Writes `M(lambda)` into `m`, four entries in row-major order.
 */
MweylStatus mweyl_m_matrix(const MweylProblem *problem, MweylComplex lambda, MweylComplex *m);

/**
 * Determinant of the boundary map whose zeros are the eigenvalues.
 */
MweylStatus mweyl_boundary_determinant(const MweylProblem *problem,
                                       MweylComplex lambda,
                                       MweylComplex *det);

/**
 * Eigenvalues in `[re_min, re_max] x [im_min, im_max]`. Writes at most
 * `capacity` values and multiplicities and stores the number found in
 * `count`; returns `MWEYL_STATUS_BUFFER_TOO_SMALL` when `count > capacity`.
 */
MweylStatus mweyl_find_eigenvalues(const MweylProblem *problem,
                                   double re_min,
                                   double re_max,
                                   double im_min,
                                   double im_max,
                                   MweylComplex *eigenvalues,
                                   size_t *multiplicities,
                                   size_t capacity,
                                   size_t *count);

/**
 * Creates the pair `(y, z)` from two expressions in `x`.
 */
MweylStatus mweyl_pair_new(const char *y, const char *z, MweylPair **pair);

/**
 * Releases a pair. Null is ignored.
 */
void mweyl_pair_free(MweylPair *pair);

/**
 * Writes `y(x)`, `y'(x)` and `z(x)` into `values`.
 */
MweylStatus mweyl_pair_eval(const MweylPair *pair, double x, MweylComplex *values);

/**
 * Applies the resolvent `(A_B - lambda)^{-1}` to `f`; the result is a new
 * pair owned by the caller.
 */
MweylStatus mweyl_resolvent_apply(const MweylProblem *problem,
                                  MweylComplex lambda,
                                  const MweylPair *f,
                                  MweylPair **result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MWEYL_H */
