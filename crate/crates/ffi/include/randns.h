#ifndef RANDNS_H
#define RANDNS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `Ok` is zero; everything else carries a message.
 */
typedef enum RandnsStatus {
  RANDNS_STATUS_OK = 0,
  RANDNS_STATUS_NULL_POINTER = 1,
  RANDNS_STATUS_INVALID_GRID = 2,
  RANDNS_STATUS_GRID_MISMATCH = 3,
  RANDNS_STATUS_INVALID_ARGUMENT = 4,
  RANDNS_STATUS_INADMISSIBLE = 5,
  RANDNS_STATUS_CONFIG = 6,
  RANDNS_STATUS_NUMERICAL = 7,
  RANDNS_STATUS_FORMAT = 8,
  RANDNS_STATUS_IO = 9,
  RANDNS_STATUS_PANIC = 10,
} RandnsStatus;

/**
 * Multiplier law for [`randns_randomize`].
 */
typedef enum RandnsLaw {
  RANDNS_LAW_GAUSSIAN = 0,
  RANDNS_LAW_RADEMACHER = 1,
} RandnsLaw;

/**
 * Time stepper for [`randns_solve`].
 */
typedef enum RandnsIntegrator {
  RANDNS_INTEGRATOR_EXP_RK2 = 2,
  RANDNS_INTEGRATOR_EXP_RK4 = 4,
} RandnsIntegrator;

/**
 * Opaque spectral field.
 */
typedef struct RandnsField RandnsField;

/**
 * Opaque solver output.
 */
typedef struct RandnsTrajectory RandnsTrajectory;

/**
 * Parameters of [`randns_solve`]. Start from [`randns_solve_params_default`].
 * `graded_start` is ignored when NaN.
 */
typedef struct RandnsSolveParams {
  double c1;
  double c2;
  double horizon;
  double dt;
  double graded_start;
  enum RandnsIntegrator integrator;
  size_t snapshot_every;
  double dense_until;
  double blowup_threshold;
} RandnsSolveParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *randns_last_error(void);

/**
 * Zero field on `[-m, m]^dim`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum RandnsStatus randns_field_new(size_t dim, size_t m, struct RandnsField **out);

/**
 * Releases a field. Null is accepted.
 *
 * # Safety
 * `field` must come from this library and not be freed twice.
 */
void randns_field_free(struct RandnsField *field);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_field_clone(const struct RandnsField *field, struct RandnsField **out);

/**
 * Number of complex coefficients, `d (2M+1)^d`; 0 for null.
 *
 * # Safety
 * `field` must be null or valid.
 */
size_t randns_field_len(const struct RandnsField *field);

/**
 * Writes dimension and truncation.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_field_shape(const struct RandnsField *field, size_t *dim, size_t *m);

/**
 * Copies the coefficients out.
 *
 * # Safety
 * `re` and `im` must hold `len` doubles each.
 */
enum RandnsStatus randns_field_get_coeffs(const struct RandnsField *field,
                                          double *re,
                                          double *im,
                                          size_t len);

/**
 * Replaces the coefficients. The data must be Hermitian with zero mean.
 *
 * # Safety
 * `re` and `im` must hold `len` doubles each.
 */
enum RandnsStatus randns_field_set_coeffs(struct RandnsField *field,
                                          const double *re,
                                          const double *im,
                                          size_t len);

/**
 * Sets `f̂_c(n) = value` and `f̂_c(−n) = conj(value)`.
 *
 * # Safety
 * `n` must hold the field's dimension many entries.
 */
enum RandnsStatus randns_field_set_pair(struct RandnsField *field,
                                        size_t component,
                                        const int64_t *n,
                                        double re,
                                        double im);

/**
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum RandnsStatus randns_field_load(const char *path, struct RandnsField **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum RandnsStatus randns_field_save(const struct RandnsField *field, const char *path);

/**
 * Solenoidal power-law datum, `|f̂(n)| = amplitude ⟨n⟩^{−decay}`.
 *
 * # Safety
 * `out` must be valid.
 */
enum RandnsStatus randns_power_law(size_t dim,
                                   size_t m,
                                   double decay,
                                   double amplitude,
                                   struct RandnsField **out);

/**
 * Leray projection.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_leray(const struct RandnsField *field, struct RandnsField **out);

/**
 * `‖f‖_{H^s}`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_sobolev_norm(const struct RandnsField *field, double s, double *out);

/**
 * `‖f‖_{L^p}`, `p >= 1` or `+inf`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_lp_norm(const struct RandnsField *field, double p, double *out);

/**
 * `e^{tΔ} f`, `t >= 0`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_heat_flow(const struct RandnsField *field,
                                   double t,
                                   struct RandnsField **out);

/**
 * Randomized field for sample `sample_index` of stream `master_seed`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_randomize(const struct RandnsField *field,
                                   enum RandnsLaw law,
                                   uint64_t master_seed,
                                   uint64_t sample_index,
                                   struct RandnsField **out);

/**
 * Dealiased, projected `(u·∇)v`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_nonlinear(const struct RandnsField *u,
                                   const struct RandnsField *v,
                                   struct RandnsField **out);

/**
 * `‖t^γ (−Δ)^{σ/2} e^{tΔ} f‖_{L^q_t([0,T]; L^p_x)}`. Fails with
 * `Inadmissible` outside the admissible range for `alpha`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_mixed_norm(const struct RandnsField *field,
                                    double sigma,
                                    double gamma,
                                    double p,
                                    double q,
                                    double horizon,
                                    double alpha,
                                    double *out);

/**
 * Default solver parameters.
 */
struct RandnsSolveParams randns_solve_params_default(void);

/**
 * Integrates the truncated difference equation from `w(0) = 0`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_solve(const struct RandnsField *forcing,
                               const struct RandnsSolveParams *params,
                               struct RandnsTrajectory **out);

/**
 * # Safety
 * `traj` must come from this library and not be freed twice.
 */
void randns_trajectory_free(struct RandnsTrajectory *traj);

/**
 * Number of snapshots; 0 for null.
 *
 * # Safety
 * `traj` must be null or valid.
 */
size_t randns_trajectory_len(const struct RandnsTrajectory *traj);

/**
 * Time and `sup_s E(s)` up to snapshot `index`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_trajectory_time(const struct RandnsTrajectory *traj,
                                         size_t index,
                                         double *time,
                                         double *energy);

/**
 * Copy of snapshot `index`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RandnsStatus randns_trajectory_snapshot(const struct RandnsTrajectory *traj,
                                             size_t index,
                                             struct RandnsField **out);

/**
 * Writes the energy trace as CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum RandnsStatus randns_trajectory_write_trace(const struct RandnsTrajectory *traj,
                                                const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANDNS_H */
