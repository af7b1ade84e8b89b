#ifndef HSYM_H
#define HSYM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Homogeneous norm selector for [`hsym_norm`].
 */
typedef enum HsymNorm {
  /**
   * `|x| + |x̄|^{1/2}`.
   */
  HSYM_NORM_SUM = 0,
  /**
   * Carnot–Carathéodory distance to the identity.
   */
  HSYM_NORM_CC = 1,
} HsymNorm;

/**
 * Time profile for [`hsym_field_from_json`].
 */
typedef enum HsymProfile {
  HSYM_PROFILE_CONSTANT = 0,
  /**
   * `4·min(t, 1 − t)` on `[0, 1]`, zero elsewhere.
   */
  HSYM_PROFILE_TRIANGULAR = 1,
} HsymProfile;

/**
 * Result of a library call.
 */
typedef enum HsymStatus {
  HSYM_STATUS_OK = 0,
  HSYM_STATUS_IO = 1,
  /**
   * Invalid arguments or configuration.
   */
  HSYM_STATUS_VALIDATION = 2,
  /**
   * A numerical procedure failed (no convergence, escape, infeasible search, failed selftest).
   */
  HSYM_STATUS_NUMERICAL = 3,
  HSYM_STATUS_NULL_POINTER = 4,
  HSYM_STATUS_PANIC = 5,
} HsymStatus;

/**
 * Compactly supported Hamiltonian on `R^{2n}`.
 */
typedef struct HsymField HsymField;

/**
 * Lift of a symplectomorphism of `R^{2n}` to a contactomorphism of `H^n`.
 */
typedef struct HsymLiftedMap HsymLiftedMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hsym_version(void);

/**
 * Message for the most recent failed call on this thread, or null. The pointer stays
 * valid until the next library call on the same thread.
 */
const char *hsym_last_error_message(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void hsym_string_free(char *s);

/**
 * `out = p · q` in `H^n`.
 *
 * # Safety
 * `p`, `q` and `out` must each hold `2n + 1` doubles.
 */
enum HsymStatus hsym_group_mul(size_t n, const double *p, const double *q, double *out);

/**
 * `out = p⁻¹`.
 *
 * # Safety
 * `p` and `out` must each hold `2n + 1` doubles.
 */
enum HsymStatus hsym_group_inv(size_t n, const double *p, double *out);

/**
 * `out = δ_eps(p) = (eps·x, eps²·x̄)`.
 *
 * # Safety
 * `p` and `out` must each hold `2n + 1` doubles.
 */
enum HsymStatus hsym_dilate(size_t n, double eps, const double *p, double *out);

/**
 * Homogeneous norm of `p`.
 *
 * # Safety
 * `p` must hold `2n + 1` doubles; `out` must point to one double.
 */
enum HsymStatus hsym_norm(size_t n, const double *p, enum HsymNorm kind, double *out);

/**
 * Carnot–Carathéodory distance between `p` and `q`, computed in closed form.
 *
 * # Safety
 * `p` and `q` must each hold `2n + 1` doubles; `out` must point to one double.
 */
enum HsymStatus hsym_cc_distance(size_t n, const double *p, const double *q, double *out);

/**
 * Lifts a catalog map (`shear`, `sine-shear`, `kick`, `rotation`, ...) with the given
 * strength. The vertical part equals `a` at `anchor`; a null anchor means the origin
 * or the lower corner of the map's support.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `anchor` is null or holds as many doubles as
 * the map's dimension; `out` must be writable.
 */
enum HsymStatus hsym_lift_new(const char *name,
                              double strength,
                              double a,
                              const double *anchor,
                              struct HsymLiftedMap **out);

/**
 * Dimension `2n` of the base space of a lifted map, or 0 for null.
 *
 * # Safety
 * `map` is null or a live handle.
 */
size_t hsym_lift_dim(const struct HsymLiftedMap *map);

/**
 * `out = G(p)`.
 *
 * # Safety
 * `map` is a live handle; `p` and `out` hold `dim + 1` doubles.
 */
enum HsymStatus hsym_lift_apply(const struct HsymLiftedMap *map, const double *p, double *out);

/**
 * `out = G⁻¹(p)`.
 *
 * # Safety
 * `map` is a live handle; `p` and `out` hold `dim + 1` doubles.
 */
enum HsymStatus hsym_lift_apply_inverse(const struct HsymLiftedMap *map,
                                        const double *p,
                                        double *out);

/**
 * Vertical part `F(x)` of the lift, so that `G(x, x̄) = (f(x), x̄ + F(x))`.
 *
 * # Safety
 * `map` is a live handle; `x` holds `dim` doubles; `out` points to one double.
 */
enum HsymStatus hsym_lift_vertical(const struct HsymLiftedMap *map, const double *x, double *out);

/**
 * Releases a lifted map. Null is ignored.
 *
 * # Safety
 * `map` must come from [`hsym_lift_new`] and must not be used afterwards.
 */
void hsym_lift_free(struct HsymLiftedMap *map);

/**
 * Builds a Hamiltonian from a JSON description such as
 * `{"kind": "harmonic", "n": 1, "scale": 1, "inner": 1, "outer": 3}` or
 * `{"kind": "bump", "center": [0, 0], "radius": 1, "amplitude": 1}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum HsymStatus hsym_field_from_json(const char *json,
                                     enum HsymProfile profile,
                                     struct HsymField **out);

/**
 * Dimension `2n` of the phase space of a field, or 0 for null.
 *
 * # Safety
 * `field` is null or a live handle.
 */
size_t hsym_field_dim(const struct HsymField *field);

/**
 * `out = H_t(x)`.
 *
 * # Safety
 * `field` is a live handle; `x` holds `dim` doubles; `out` points to one double.
 */
enum HsymStatus hsym_field_value(const struct HsymField *field,
                                 double t,
                                 const double *x,
                                 double *out);

/**
 * Image of `x0` under the time-`t0` to time-`t1` flow, with `steps` RK4 steps.
 *
 * # Safety
 * `field` is a live handle; `x0` and `out` hold `dim` doubles.
 */
enum HsymStatus hsym_field_flow_point(const struct HsymField *field,
                                      const double *x0,
                                      double t0,
                                      double t1,
                                      size_t steps,
                                      double *out);

/**
 * Hofer length `∫₀^T sup|H_t| dt` on a regular grid over the support with
 * `grid_per_axis` nodes per axis and `time_samples` times.
 *
 * # Safety
 * `field` is a live handle; `out` points to one double.
 */
enum HsymStatus hsym_field_hofer_length(const struct HsymField *field,
                                        double t_end,
                                        size_t grid_per_axis,
                                        size_t time_samples,
                                        double *out);

/**
 * Releases a field. Null is ignored.
 *
 * # Safety
 * `field` must come from [`hsym_field_from_json`] and must not be used afterwards.
 */
void hsym_field_free(struct HsymField *field);

/**
 * Runs a scenario given as config text (the `hsym run` format) and returns its JSON
 * report in `*out_json` without writing any files. A selftest with a failing
 * criterion still produces a report and returns [`HsymStatus::Numerical`].
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out_json` must be writable.
 */
enum HsymStatus hsym_run_config(const char *config, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSYM_H */
