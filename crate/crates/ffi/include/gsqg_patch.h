#ifndef GSQG_PATCH_H
#define GSQG_PATCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum GsqgStatus {
  GSQG_STATUS_OK = 0,
  GSQG_STATUS_NULL_POINTER = 1,
  GSQG_STATUS_INVALID_ARGUMENT = 2,
  GSQG_STATUS_OUTSIDE_DOMAIN = 3,
  GSQG_STATUS_INFEASIBLE_FLUX = 4,
  GSQG_STATUS_GEOMETRY = 5,
  GSQG_STATUS_SINGULAR_JACOBIAN = 6,
  GSQG_STATUS_NON_CONVERGENCE = 7,
  GSQG_STATUS_CONSTRAINT = 8,
  GSQG_STATUS_BUFFER_TOO_SMALL = 9,
  GSQG_STATUS_PANIC = 10,
} GsqgStatus;

/**
 * Green function of a domain for one `γ`.
 */
typedef struct GsqgKernel GsqgKernel;

/**
 * A continuation curve of patch equilibria.
 */
typedef struct GsqgSolution GsqgSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes. Returns the full message length without the NUL.
 */
size_t gsqg_last_error(char *buf, size_t len);

/**
 * `σ_j` for `1 < γ < 2`.
 */
enum GsqgStatus gsqg_sigma(double gamma, uint32_t j, double *out);

/**
 * `σ_1, …, σ_n` into `out[0..n]`.
 */
enum GsqgStatus gsqg_spectrum(double gamma, size_t n, double *out);

enum GsqgStatus gsqg_kernel_disc(double radius, double gamma, struct GsqgKernel **out);

enum GsqgStatus gsqg_kernel_free_space(double gamma, struct GsqgKernel **out);

void gsqg_kernel_free(struct GsqgKernel *kernel);

/**
 * Critical point of the Kirchhoff-Routh function reached from the seed
 * `points` (`x0, y0, x1, y1, …`), written to `out` (`2m` values).
 */
enum GsqgStatus gsqg_kr_critical(const struct GsqgKernel *kernel,
                                 const double *points,
                                 const double *strengths,
                                 size_t m,
                                 double *out);

/**
 * Continues from the critical point reached from `points` through
 * `eps_targets` with truncation `n` and default settings. A curve that stops
 * early is still returned, with status `Constraint` if a state left the
 * admissible set and `NonConvergence` otherwise; the reason is in
 * [`gsqg_last_error`].
 */
enum GsqgStatus gsqg_solve(const struct GsqgKernel *kernel,
                           const double *points,
                           const double *strengths,
                           size_t m,
                           size_t n,
                           const double *eps_targets,
                           size_t n_targets,
                           struct GsqgSolution **out);

void gsqg_solution_free(struct GsqgSolution *sol);

/**
 * Number of solved states on the curve; 0 for a null handle.
 */
size_t gsqg_solution_len(const struct GsqgSolution *sol);

/**
 * `ε` of state `k`, and its centers (`2m` values) if `centers` is not null.
 */
enum GsqgStatus gsqg_solution_state(const struct GsqgSolution *sol,
                                    size_t k,
                                    double *eps,
                                    double *centers,
                                    size_t len);

/**
 * Boundary of patch `patch` of state `k` at `count` equispaced angles, as
 * `x0, y0, x1, y1, …` (`2·count` values).
 */
enum GsqgStatus gsqg_solution_boundary(const struct GsqgSolution *sol,
                                       size_t k,
                                       size_t patch,
                                       size_t count,
                                       double *out);

/**
 * Writes the curve as JSON into `buf` (NUL-terminated) and its length
 * without the NUL into `needed`. With a short or null buffer only
 * `needed` is set and the status is `BufferTooSmall`.
 */
enum GsqgStatus gsqg_solution_json(const struct GsqgSolution *sol,
                                   char *buf,
                                   size_t len,
                                   size_t *needed);

/**
 * Status name as a static NUL-terminated string.
 */
const char *gsqg_status_name(enum GsqgStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSQG_PATCH_H */
