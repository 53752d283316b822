#ifndef CHIRALDYN_H
#define CHIRALDYN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. `Ok` is zero; every other value is an error.
typedef enum ChiraldynStatus {
  CHIRALDYN_STATUS_OK = 0,
  CHIRALDYN_STATUS_INVALID_ARGUMENT = 1,
  CHIRALDYN_STATUS_NULL_POINTER = 2,
  CHIRALDYN_STATUS_NUMERIC_FAILURE = 3,
  CHIRALDYN_STATUS_NO_STEADY_STATE = 4,
  CHIRALDYN_STATUS_ABOVE_THRESHOLD = 5,
  CHIRALDYN_STATUS_DATA_INCONSISTENCY = 6,
  CHIRALDYN_STATUS_UNDEFINED_LOCAL_OSCILLATOR = 7,
  CHIRALDYN_STATUS_TRUNCATION = 8,
  CHIRALDYN_STATUS_FIT_FAILURE = 9,
  CHIRALDYN_STATUS_VALIDATION = 10,
  CHIRALDYN_STATUS_PARSE = 11,
  CHIRALDYN_STATUS_IO = 12,
  CHIRALDYN_STATUS_BUFFER_TOO_SMALL = 13,
  CHIRALDYN_STATUS_PANIC = 14,
} ChiraldynStatus;

typedef enum ChiraldynCoupling {
  CHIRALDYN_COUPLING_DBS = 0,
  CHIRALDYN_COUPLING_NHPA = 1,
} ChiraldynCoupling;

// Opaque light–spin model.
typedef struct ChiraldynModel ChiraldynModel;

// Opaque Gaussian state.
typedef struct ChiraldynState ChiraldynState;

// Rates of the three-mode model in rad/s; `carrier_hz` in Hz.
typedef struct ChiraldynModelParams {
  double g1;
  double g2;
  double gamma_spin;
  double kappa1;
  double kappa2;
  double delta_spin;
  double carrier_hz;
} ChiraldynModelParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *chiraldyn_version(void);

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on this thread.
const char *chiraldyn_last_error(void);

// Coupling produced by two control beams. Handedness is 0 for RHCP and 1
// for LHCP; direction is +1 for +z and -1 for -z.
//
// # Safety
// `out` must be null or point to writable memory.
enum ChiraldynStatus chiraldyn_coupling_kind(int handedness1,
                                             int direction1,
                                             int handedness2,
                                             int direction2,
                                             enum ChiraldynCoupling *out);

// Zero-mean state from a row-major `2n × 2n` covariance.
//
// # Safety
// `cov` must point to `4 n_modes²` doubles; `out` must be writable.
enum ChiraldynStatus chiraldyn_state_new(size_t n_modes,
                                         const double *cov,
                                         struct ChiraldynState **out);

// Same as [`chiraldyn_state_new`] with a displacement vector of length `2n`.
//
// # Safety
// `mean` must point to `2 n_modes` doubles and `cov` to `4 n_modes²`.
enum ChiraldynStatus chiraldyn_state_new_displaced(size_t n_modes,
                                                   const double *mean,
                                                   const double *cov,
                                                   struct ChiraldynState **out);

// Releases a state. Null is ignored.
//
// # Safety
// `state` must come from this library and not be used afterwards.
void chiraldyn_state_free(struct ChiraldynState *state);

// Number of modes, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t chiraldyn_state_n_modes(const struct ChiraldynState *state);

// Copies the covariance into `buf` (row-major, `len ≥ 4n²`).
//
// # Safety
// `buf` must point to `len` writable doubles.
enum ChiraldynStatus chiraldyn_state_cov(const struct ChiraldynState *state,
                                         double *buf,
                                         size_t len);

// Whether every symplectic eigenvalue is at least `1 - tol`.
//
// # Safety
// `state` must be a live handle and `out` writable.
enum ChiraldynStatus chiraldyn_state_is_physical(const struct ChiraldynState *state,
                                                 double tol,
                                                 bool *out);

// Symplectic eigenvalues in descending order; `len ≥ n_modes`.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum ChiraldynStatus chiraldyn_state_symplectic_eigenvalues(const struct ChiraldynState *state,
                                                            double *buf,
                                                            size_t len);

// Gaussian discord in bits of a two-mode state. `measured` is 0 for mode
// A and 1 for mode B. `branch` (may be null) receives 1 or 2 for the
// first or second minimization branch.
//
// # Safety
// `state` must be a live handle; `discord` writable; `branch` null or
// writable.
enum ChiraldynStatus chiraldyn_state_discord(const struct ChiraldynState *state,
                                             int measured,
                                             double *discord,
                                             int *branch);

// Correlation metric `Q` of a two-mode state.
//
// # Safety
// `state` must be a live handle and `out` writable.
enum ChiraldynStatus chiraldyn_state_q(const struct ChiraldynState *state, double *out);

// Builds the three-mode light–spin model. `kind` takes a
// [`ChiraldynCoupling`] value.
//
// # Safety
// `params` must be readable and `out` writable.
enum ChiraldynStatus chiraldyn_model_new(int kind,
                                         const struct ChiraldynModelParams *params,
                                         struct ChiraldynModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must come from this library and not be used afterwards.
void chiraldyn_model_free(struct ChiraldynModel *model);

// Cooperativity `4 g₁ g₂ / (γ √(κ₁κ₂))`, or NaN for a null handle.
//
// # Safety
// `model` must be null or a live handle.
double chiraldyn_model_cooperativity(const struct ChiraldynModel *model);

// Steady-state three-mode covariance (channels 1, 2, then the spin).
//
// # Safety
// `model` must be a live handle and `out` writable.
enum ChiraldynStatus chiraldyn_model_steady_state(const struct ChiraldynModel *model,
                                                  struct ChiraldynState **out);

// Two-mode covariance of the output sidebands at `freq_hz`.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum ChiraldynStatus chiraldyn_model_output_state(const struct ChiraldynModel *model,
                                                  double freq_hz,
                                                  struct ChiraldynState **out);

// Output noise spectrum of one quadrature combination (for example
// `"X1-X2"`) at each of `n` ascending frequencies.
//
// # Safety
// `selector` must be a NUL-terminated string; `freq_hz` and `values` must
// point to `n` doubles.
enum ChiraldynStatus chiraldyn_model_spectrum(const struct ChiraldynModel *model,
                                              const char *selector,
                                              const double *freq_hz,
                                              size_t n,
                                              double resolution_bw_hz,
                                              double *values);

// Bessel function of the first kind `J_n(x)`.
double chiraldyn_bessel_j(int n, double x);

// Fits `amplitude · J_order(k_u / ν₁)` to `n` points. `order` is 0 or 1.
// `rms_residual` may be null.
//
// # Safety
// `nu1_hz` and `amplitudes` must point to `n` doubles; `k_u_hz` and
// `amplitude` must be writable.
enum ChiraldynStatus chiraldyn_bessel_fit(int order,
                                          const double *nu1_hz,
                                          const double *amplitudes,
                                          size_t n,
                                          double *k_u_hz,
                                          double *amplitude,
                                          double *rms_residual);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHIRALDYN_H */
