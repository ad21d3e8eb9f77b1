#ifndef SIGMA_MINMAX_H
#define SIGMA_MINMAX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum SmStatus {
  SM_STATUS_OK = 0,
  SM_STATUS_NULL_POINTER = 1,
  SM_STATUS_INVALID_UTF8 = 2,
  SM_STATUS_INVALID_CONFIG = 3,
  SM_STATUS_DOMAIN = 4,
  SM_STATUS_COMPUTATION = 5,
  SM_STATUS_UNKNOWN_NAME = 6,
  // No feasible candidate; the out-value is left untouched.
  SM_STATUS_NO_VALUE = 7,
  SM_STATUS_PANIC = 8,
} SmStatus;

// Opaque configuration handle.
typedef struct SmConfig SmConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. The pointer
// stays valid until the next library call on the same thread.
const char *sm_last_error(void);

// Library version as a static NUL-terminated string.
const char *sm_version(void);

// Parses a configuration document (the CLI's JSON format).
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum SmStatus sm_config_from_json(const char *json, struct SmConfig **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `cfg` must come from [`sm_config_from_json`] and not be used afterwards.
void sm_config_free(struct SmConfig *cfg);

// Number of points, including the origin.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum SmStatus sm_config_len(const struct SmConfig *cfg, size_t *out);

// Certified lower bound on `M_σ` (sharp and flat branches, singletons
// included).
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum SmStatus sm_m_sigma(const struct SmConfig *cfg, double *out);

// Certified lower bound on `M♯` over subsets containing the last `tail`
// points (0 for all subsets).
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum SmStatus sm_m_sharp(const struct SmConfig *cfg, size_t tail, double *out);

// Certified lower bound on `M♭` (never below 0).
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum SmStatus sm_m_flat(const struct SmConfig *cfg, double *out);

// Flat maximum restricted to subsets of at least two points.
// [`SmStatus::NoValue`] when fewer than two distinct points exist.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum SmStatus sm_bar_m_flat(const struct SmConfig *cfg, double *out);

// Runs a certificate by name (`all` for the built-in three) and returns
// the JSON report list through `out_json`; `out_pass` receives 1 when
// every check passed, else 0. Release the string with [`sm_string_free`].
//
// # Safety
// `name` must be NUL-terminated; `out_json` and `out_pass` writable.
enum SmStatus sm_certify_json(const char *name, char **out_json, int32_t *out_pass);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void sm_string_free(char *s);

// `0⓵MinMax_σ = max{0, 1 − 3/(4σ)}` for σ in (1/2, 1].
//
// # Safety
// `out` must be writable.
enum SmStatus sm_zero_gen_minmax(double sigma, double *out);

// `1⓵MinMax_σ` for σ in (1/2, 3/4].
//
// # Safety
// `out` must be writable.
enum SmStatus sm_one_gen_minmax(double sigma, double *out);

// Closed-form `M♯({O, p₁, p₂})` from the side lengths `D = |p₁ − p₂|`,
// `d1 = |p₁|`, `d2 = |p₂|`.
//
// # Safety
// `out` must be writable.
enum SmStatus sm_max_diesis(double sigma, double d, double d1, double d2, double *out);

// Root of `8s³ + 4s² − 3s − 3`, about 0.72655.
double sm_sigma_pt(void);

// Root of `32s³ − 32s² + 12s − 3`, about 0.64368.
double sm_sigma_lower(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIGMA_MINMAX_H */
