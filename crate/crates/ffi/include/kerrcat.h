#ifndef KERRCAT_H
#define KERRCAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KcKcqInit {
  KC_KCQ_INIT_CAT_PLUS = 0,
  KC_KCQ_INIT_PLUS_Z = 1,
} KcKcqInit;

typedef enum KcModel {
  KC_MODEL_FULL = 0,
  KC_MODEL_EFFECTIVE = 1,
} KcModel;

typedef enum KcObservable {
  KC_OBSERVABLE_X_CAT = 0,
  KC_OBSERVABLE_Y_CAT = 1,
  KC_OBSERVABLE_Z_CAT = 2,
  KC_OBSERVABLE_X_TRANSMON = 3,
  KC_OBSERVABLE_Y_TRANSMON = 4,
  KC_OBSERVABLE_Z_TRANSMON = 5,
} KcObservable;

/**
 * Result code of every call.
 */
typedef enum KcStatus {
  KC_STATUS_OK = 0,
  KC_STATUS_NULL_POINTER = 1,
  KC_STATUS_INVALID_ARGUMENT = 2,
  KC_STATUS_VALIDATION = 3,
  KC_STATUS_INTEGRATOR = 4,
  KC_STATUS_FIT = 5,
  KC_STATUS_IO = 6,
  KC_STATUS_PANIC = 7,
} KcStatus;

typedef enum KcTransmonInit {
  KC_TRANSMON_INIT_PLUS_X = 0,
  KC_TRANSMON_INIT_PLUS_Z = 1,
} KcTransmonInit;

/**
 * Opaque fit result.
 */
typedef struct KcFit KcFit;

/**
 * Opaque simulation parameters.
 */
typedef struct KcParams KcParams;

/**
 * SNAIL circuit; `l_j_nh` is the large-junction inductance.
 */
typedef struct KcSnailSpec {
  double e_c;
  double e_l;
  double l_j_nh;
  double asymmetry;
  uint32_t n_junctions;
  uint32_t n_snails;
} KcSnailSpec;

/**
 * Expansion of the SNAIL mode about its potential minimum.
 */
typedef struct KcSnailPoint {
  double omega;
  double g3;
  double g4;
  double c2;
  double c3;
  double c4;
} KcSnailPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call on the same thread.
 */
const char *kc_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *kc_version(void);

/**
 * Device defaults. Release with [`kc_params_free`].
 */
enum KcStatus kc_params_new(struct KcParams **out);

void kc_params_free(struct KcParams *p);

/**
 * Sets a named parameter (`alpha`, `xi`, `phi`, `t1_a`, ...). A lifetime
 * of `INFINITY` drops its channel.
 */
enum KcStatus kc_params_set(struct KcParams *p, const char *name, double value);

enum KcStatus kc_params_get(const struct KcParams *p, const char *name, double *out);

/**
 * Checks the parameters, including the Fock truncation guard.
 */
enum KcStatus kc_params_validate(const struct KcParams *p);

/**
 * Evolves one parameter point and writes `observable` at each of the
 * `n` strictly increasing `times` into `out` (length `n`). The codes take
 * the values of [`KcModel`], [`KcKcqInit`], [`KcTransmonInit`] and
 * [`KcObservable`].
 */
enum KcStatus kc_simulate(const struct KcParams *p,
                          uint32_t model,
                          uint32_t kcq,
                          uint32_t transmon,
                          uint32_t observable,
                          const double *times,
                          size_t n,
                          double dt,
                          double *out);

/**
 * Fits `A exp(-(t - t_ref)/tau) cos(2 pi f t + phase) + offset`.
 * Parameter names: amplitude, frequency, phase, tau, offset, t_ref.
 */
enum KcStatus kc_fit_damped_sinusoid(const double *t,
                                     const double *y,
                                     size_t n,
                                     struct KcFit **out);

/**
 * Fits the conversion factor `c` of `omega_a - k_a (c V)^2`.
 */
enum KcStatus kc_fit_stark_shift(double omega_a,
                                 double k_a,
                                 const double *v,
                                 const double *freq,
                                 size_t n,
                                 struct KcFit **out);

/**
 * Slope of rate versus drive amplitude over cat size; the secant rule
 * picks the linear regime. Names: g3_tilde, intercept.
 */
enum KcStatus kc_extract_g3_tilde(const double *xi,
                                  const double *omega,
                                  size_t n,
                                  double alpha,
                                  struct KcFit **out);

void kc_fit_free(struct KcFit *f);

/**
 * Value and 1σ uncertainty of a named fit parameter; `sigma` may be null.
 */
enum KcStatus kc_fit_value(const struct KcFit *f, const char *name, double *value, double *sigma);

/**
 * Writes 1 if the fit converged, else 0, and the residual RMS if
 * `residual_rms` is non-null.
 */
enum KcStatus kc_fit_status(const struct KcFit *f, int32_t *converged, double *residual_rms);

/**
 * Mode frequency and couplings of a SNAIL chain at `flux` (flux quanta).
 */
enum KcStatus kc_snail_point(const struct KcSnailSpec *spec, double flux, struct KcSnailPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KERRCAT_H */
