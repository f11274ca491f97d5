#ifndef POLARITON_H
#define POLARITON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PolBand {
  POL_BAND_BELOW_BAND = 0,
  POL_BAND_LOWER_LOWER = 1,
  POL_BAND_GAP = 2,
  POL_BAND_LOWER_UPPER = 3,
  POL_BAND_UPPER_UPPER = 4,
} PolBand;

typedef enum PolStatus {
  POL_STATUS_OK = 0,
  POL_STATUS_NULL_POINTER = 1,
  POL_STATUS_INVALID_ARGUMENT = 2,
  POL_STATUS_INVALID_CONFIG = 3,
  POL_STATUS_NUMERICAL = 4,
  POL_STATUS_OUT_OF_RANGE = 5,
  POL_STATUS_IO = 6,
  POL_STATUS_PANIC = 7,
} PolStatus;

/**
 * Derived model parameters.
 */
typedef struct PolModel PolModel;

/**
 * A solved K = 0 spectrum.
 */
typedef struct PolSpectrum PolSpectrum;

/**
 * Summary of one K = 0 eigenstate.
 */
typedef struct PolState {
  /**
   * 1-based position in the spectrum.
   */
  size_t index;
  /**
   * 1-based position within its band.
   */
  size_t rho;
  enum PolBand band;
  double energy_hz;
  /**
   * E − 2E0 (Hz).
   */
  double offset_hz;
  /**
   * Effective wave vector (1/m); NaN when undefined.
   */
  double k_eff_per_m;
  double delta_a;
} PolState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *pol_version(void);

/**
 * Length in bytes of the last error message including its NUL, or 0.
 */
size_t pol_last_error_length(void);

/**
 * Copies the last error message into `buf` (truncated, always
 * NUL-terminated when `len > 0`).
 *
 * # Safety
 * `buf` must point to `len` writable bytes.
 */
enum PolStatus pol_last_error_message(char *buf, size_t len);

/**
 * Rb D2 scenario with the defaults of the command-line tool.
 *
 * # Safety
 * `out` must be a valid pointer to write a handle into.
 */
enum PolStatus pol_model_default(struct PolModel **out);

/**
 * Model from a JSON run configuration (same keys as the CLI `--config`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum PolStatus pol_model_from_json(const char *json, struct PolModel **out);

/**
 * # Safety
 * `model` must come from a `pol_model_*` constructor and not be used again.
 */
void pol_model_free(struct PolModel *model);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PolStatus pol_model_n_sites(const struct PolModel *model, size_t *out);

/**
 * Collective coupling G/2π (Hz).
 *
 * # Safety
 * Pointers must be valid.
 */
enum PolStatus pol_model_coupling_hz(const struct PolModel *model, double *out);

/**
 * Cavity detuning δ/2π (Hz).
 *
 * # Safety
 * Pointers must be valid.
 */
enum PolStatus pol_model_detuning_hz(const struct PolModel *model, double *out);

/**
 * Solves the K = 0 two-polariton spectrum.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PolStatus pol_spectrum_solve(const struct PolModel *model, struct PolSpectrum **out);

/**
 * # Safety
 * `spectrum` must come from [`pol_spectrum_solve`] and not be used again.
 */
void pol_spectrum_free(struct PolSpectrum *spectrum);

/**
 * Number of symmetric states.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PolStatus pol_spectrum_len(const struct PolSpectrum *spectrum, size_t *out);

/**
 * Summary of state `index` (0-based, ascending energy).
 *
 * # Safety
 * Pointers must be valid.
 */
enum PolStatus pol_spectrum_state(const struct PolSpectrum *spectrum,
                                  size_t index,
                                  struct PolState *out);

/**
 * Real-space amplitudes A(n), B(n), C(n) of state `index` for
 * n ∈ (−N/2, N/2], n = 0 at position N/2 − 1. Each buffer holds `len` = N
 * values; pass null to skip one.
 *
 * # Safety
 * Non-null buffers must hold `len` writable doubles.
 */
enum PolStatus pol_spectrum_real_space(const struct PolSpectrum *spectrum,
                                       size_t index,
                                       double *a,
                                       double *b,
                                       double *c,
                                       size_t len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* POLARITON_H */
