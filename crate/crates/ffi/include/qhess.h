#ifndef QHESS_H
#define QHESS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QhessStatus {
  QHESS_STATUS_OK = 0,
  QHESS_STATUS_NULL_POINTER = 1,
  QHESS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Output buffer shorter than the result.
   */
  QHESS_STATUS_BUFFER_TOO_SMALL = 3,
  QHESS_STATUS_NOT_CONVERGED = 4,
  QHESS_STATUS_FAILED = 5,
  QHESS_STATUS_PANIC = 6,
} QhessStatus;

/**
 * Hessian density on the interior points of a grid.
 */
typedef struct QhessDensity QhessDensity;

/**
 * Sampled grid function.
 */
typedef struct QhessGrid QhessGrid;

/**
 * Hyperhermitian quaternionic matrix.
 */
typedef struct QhessMatrix QhessMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *qhess_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qhess_version(void);

/**
 * Grid of `points^(4n)` values on `[-half_width, half_width]^(4n)`, row-major
 * with axis 0 slowest.
 *
 * # Safety
 * `values` must hold `len` doubles; `out` must be writable.
 */
enum QhessStatus qhess_grid_new(size_t n,
                                double half_width,
                                size_t points,
                                const double *values,
                                size_t len,
                                struct QhessGrid **out);

/**
 * # Safety
 * `grid` must come from [`qhess_grid_new`] and not be used afterwards.
 */
void qhess_grid_free(struct QhessGrid *grid);

/**
 * Density `(Δu)^m ∧ β^{n−m}` of a grid function.
 *
 * # Safety
 * `grid` must be a live handle; `out` must be writable.
 */
enum QhessStatus qhess_hessian_density(const struct QhessGrid *grid,
                                       size_t m,
                                       struct QhessDensity **out);

/**
 * # Safety
 * `density` must be a live handle; `len` must be writable.
 */
enum QhessStatus qhess_density_len(const struct QhessDensity *density, size_t *len);

/**
 * Copies the density values (interior points, row-major).
 *
 * # Safety
 * `density` must be a live handle; `out` must hold `cap` doubles.
 */
enum QhessStatus qhess_density_values(const struct QhessDensity *density, double *out, size_t cap);

/**
 * Sum of density times cell volume over the interior points.
 *
 * # Safety
 * `density` must be a live handle; `mass` must be writable.
 */
enum QhessStatus qhess_density_total_mass(const struct QhessDensity *density, double *mass);

/**
 * # Safety
 * `density` must come from [`qhess_hessian_density`] and not be used afterwards.
 */
void qhess_density_free(struct QhessDensity *density);

/**
 * Matrix from `n·n` quaternions stored as 4 doubles each, row-major.
 *
 * # Safety
 * `entries` must hold `4·n·n` doubles; `out` must be writable.
 */
enum QhessStatus qhess_matrix_new(size_t n, const double *entries, struct QhessMatrix **out);

/**
 * # Safety
 * `matrix` must be a live handle; `det` must be writable.
 */
enum QhessStatus qhess_matrix_moore_det(const struct QhessMatrix *matrix, double *det);

/**
 * The `n` real eigenvalues in ascending order.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must hold `cap` doubles.
 */
enum QhessStatus qhess_matrix_eigenvalues(const struct QhessMatrix *matrix,
                                          double *out,
                                          size_t cap);

/**
 * # Safety
 * `matrix` must come from [`qhess_matrix_new`] and not be used afterwards.
 */
void qhess_matrix_free(struct QhessMatrix *matrix);

/**
 * Radial relative extremal function of the ball of radius `inner` in the
 * ball of radius `outer`, sampled at `intervals + 1` radii. `sup_error`
 * receives the distance to the closed form.
 *
 * # Safety
 * `out` must hold `cap` doubles; `sup_error` must be writable.
 */
enum QhessStatus qhess_radial_extremal(size_t n,
                                       size_t m,
                                       double inner,
                                       double outer,
                                       size_t intervals,
                                       double tol,
                                       double *out,
                                       size_t cap,
                                       double *sup_error);

/**
 * Capacity of the ball of radius `inner` relative to the ball of radius
 * `outer`, with the closed-form value alongside.
 *
 * # Safety
 * `capacity` and `closed_form` must be writable.
 */
enum QhessStatus qhess_radial_capacity(size_t n,
                                       size_t m,
                                       double inner,
                                       double outer,
                                       size_t intervals,
                                       double tol,
                                       double *capacity,
                                       double *closed_form);

/**
 * Radial solution of `(Δφ)^m ∧ β^{n−m} = μ` in the ball of radius `outer`
 * with `φ = 0` on the sphere. `mu` holds one density value per shell
 * (`intervals` values); `out` receives `intervals + 1` values.
 *
 * # Safety
 * `mu` must hold `intervals` doubles, `out` `cap` doubles; `iterations`
 * must be writable.
 */
enum QhessStatus qhess_radial_solve(size_t n,
                                    size_t m,
                                    double outer,
                                    size_t intervals,
                                    const double *mu,
                                    double tol,
                                    size_t max_iter,
                                    double *out,
                                    size_t cap,
                                    size_t *iterations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QHESS_H */
