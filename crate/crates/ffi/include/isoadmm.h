/* Generated by cbindgen from crates/ffi. Do not edit. */

#ifndef ISOADMM_H
#define ISOADMM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsoInit {
  ISO_INIT_FROM_OBSERVATIONS = 0,
  ISO_INIT_ZEROS = 1,
} IsoInit;

/*
 Result code of every fallible call.
 */
typedef enum IsoStatus {
  ISO_STATUS_OK = 0,
  ISO_STATUS_NULL_POINTER = 1,
  ISO_STATUS_INVALID_INPUT = 2,
  ISO_STATUS_CAPACITY = 3,
  ISO_STATUS_INTERNAL = 4,
  ISO_STATUS_PANIC = 5,
  ISO_STATUS_BUFFER_TOO_SMALL = 6,
} IsoStatus;

/*
 Termination reason of a solve.
 */
typedef enum IsoRunStatus {
  ISO_RUN_STATUS_CONVERGED = 0,
  ISO_RUN_STATUS_MAX_ITER_REACHED = 1,
  ISO_RUN_STATUS_DIVERGED = 2,
} IsoRunStatus;

/*
 Opaque DAG instance.
 */
typedef struct IsoDagInstance IsoDagInstance;

/*
 Opaque solve result.
 */
typedef struct IsoReport IsoReport;

/*
 Opaque smoothed-chain instance.
 */
typedef struct IsoSmoothInstance IsoSmoothInstance;

/*
 Plain-data solver settings; obtain defaults from [`iso_config_default`].
 */
typedef struct IsoSolverConfig {
  double rho;
  size_t max_iter;
  double tol_factor;
  double divergence_bound;
  enum IsoInit init;
  size_t threads;
} IsoSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the most recent failure on this thread, or NULL.
 The pointer stays valid until the next failing call on the same thread.
 */
const char *iso_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *iso_version(void);

struct IsoSolverConfig iso_config_default(void);

/*
 Creates a smoothed-chain instance. `w` may be NULL for unit weights.

 # Safety
 `x` (and `w` when non-null) must point to `n` readable doubles; `out`
 must be a valid pointer to write the handle to.
 */
enum IsoStatus iso_smooth_instance_new(const double *x,
                                       const double *w,
                                       size_t n,
                                       double lambda,
                                       struct IsoSmoothInstance **out);

/*
 # Safety
 `inst` must be NULL or a handle from [`iso_smooth_instance_new`] not yet freed.
 */
void iso_smooth_instance_free(struct IsoSmoothInstance *inst);

/*
 Creates a DAG instance with `m` edges `tails[k] -> heads[k]`, each
 requiring `alpha[tails[k]] <= alpha[heads[k]]`. `w` may be NULL.

 # Safety
 `y` (and `w` when non-null) must point to `n` readable doubles, `tails`
 and `heads` to `m` readable `size_t` values; `out` must be writable.
 */
enum IsoStatus iso_dag_instance_new(const double *y,
                                    const double *w,
                                    size_t n,
                                    const size_t *tails,
                                    const size_t *heads,
                                    size_t m,
                                    struct IsoDagInstance **out);

/*
 # Safety
 `inst` must be NULL or a handle from [`iso_dag_instance_new`] not yet freed.
 */
void iso_dag_instance_free(struct IsoDagInstance *inst);

/*
 Runs the chain solver. `cfg` may be NULL for defaults.

 # Safety
 `inst` must be a live handle, `cfg` NULL or readable, `out` writable.
 */
enum IsoStatus iso_solve_smooth(const struct IsoSmoothInstance *inst,
                                const struct IsoSolverConfig *cfg,
                                struct IsoReport **out);

/*
 Runs the DAG solver. `cfg` may be NULL for defaults.

 # Safety
 `inst` must be a live handle, `cfg` NULL or readable, `out` writable.
 */
enum IsoStatus iso_solve_dag(const struct IsoDagInstance *inst,
                             const struct IsoSolverConfig *cfg,
                             struct IsoReport **out);

/*
 # Safety
 `report` must be NULL or a handle from a solve call not yet freed.
 */
void iso_report_free(struct IsoReport *report);

/*
 # Safety
 `report` must be a live handle.
 */
enum IsoRunStatus iso_report_status(const struct IsoReport *report);

/*
 # Safety
 `report` must be a live handle.
 */
size_t iso_report_iterations(const struct IsoReport *report);

/*
 Number of fitted values.

 # Safety
 `report` must be a live handle.
 */
size_t iso_report_len(const struct IsoReport *report);

/*
 Final primal residual, dual residual, tolerance and objective. Any output
 pointer may be NULL.

 # Safety
 `report` must be a live handle; non-null outputs must be writable.
 */
enum IsoStatus iso_report_summary(const struct IsoReport *report,
                                  double *final_r,
                                  double *final_s,
                                  double *epsilon,
                                  double *objective);

/*
 Copies the fitted values into `out`, which must hold `iso_report_len`.

 # Safety
 `report` must be a live handle; `out` must have room for `cap` doubles.
 */
enum IsoStatus iso_report_copy_solution(const struct IsoReport *report, double *out, size_t cap);

/*
 Copies the per-iteration primal residual, dual residual and objective
 (one entry per iteration, `iso_report_iterations` of them). Any output
 pointer may be NULL to skip that column.

 # Safety
 `report` must be a live handle; non-null outputs need room for `cap` doubles.
 */
enum IsoStatus iso_report_copy_trace(const struct IsoReport *report,
                                     double *r,
                                     double *s,
                                     double *objective,
                                     size_t cap);

/*
 JSON encoding of the full report. Release with [`iso_string_free`].

 # Safety
 `report` must be a live handle.
 */
char *iso_report_to_json(const struct IsoReport *report);

/*
 # Safety
 `s` must be NULL or a string returned by this library, not yet freed.
 */
void iso_string_free(char *s);

/*
 Classic weighted isotonic regression by pool-adjacent-violators.
 `w` may be NULL for unit weights; `out` receives `n` values.

 # Safety
 `x` (and `w` when non-null) must hold `n` doubles, `out` room for `n`.
 */
enum IsoStatus iso_pav(const double *x, const double *w, size_t n, double *out);

/*
 Exact solution of a small chain instance by active-set enumeration.
 `kkt_residual` may be NULL.

 # Safety
 `inst` must be a live handle; `out` must have room for `cap` doubles.
 */
enum IsoStatus iso_exact_smooth(const struct IsoSmoothInstance *inst,
                                double *out,
                                size_t cap,
                                double *kkt_residual);

/*
 Exact solution of a small DAG instance by active-set enumeration.

 # Safety
 `inst` must be a live handle; `out` must have room for `cap` doubles.
 */
enum IsoStatus iso_exact_dag(const struct IsoDagInstance *inst,
                             double *out,
                             size_t cap,
                             double *kkt_residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOADMM_H */
