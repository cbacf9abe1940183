#ifndef FDA_SECRECY_H
#define FDA_SECRECY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum FdsStatus {
  FDS_STATUS_OK = 0,
  FDS_STATUS_NULL_POINTER = 1,
  FDS_STATUS_INVALID_ARGUMENT = 2,
  // Configuration text failed to parse or validate.
  FDS_STATUS_CONFIG = 3,
  // A numerical guard fired (truncation, cancellation, quadrature, consistency).
  FDS_STATUS_NUMERICAL = 4,
  // The metric is undefined when Eve's average SNR is zero.
  FDS_STATUS_DEGENERATE_EVE = 5,
  FDS_STATUS_PANIC = 6,
} FdsStatus;

// Opaque fitted exponential mixture.
typedef struct FdsMixture FdsMixture;

// Opaque Bob/Eve link pair with its constellation.
typedef struct FdsWiretap FdsWiretap;

// Fading parameters (m, K, Δ) of one link.
typedef struct FdsFading {
  uint32_t m;
  double k;
  double delta;
} FdsFading;

typedef struct FdsAsymptote {
  double limit_value;
  double slope_coeff;
  double chi_b;
} FdsAsymptote;

typedef struct FdsMcEstimate {
  double mean;
  double std_error;
  uint64_t n_samples;
  uint64_t seed;
} FdsMcEstimate;

typedef struct FdsMcResult {
  struct FdsMcEstimate asr;
  struct FdsMcEstimate p_pos;
  struct FdsMcEstimate gaussian_asr;
  // Valid only when `has_sop` is true.
  struct FdsMcEstimate sop;
  bool has_sop;
} FdsMcResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
//
// Returns the full message length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t fds_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *fds_version(void);

// Wiretap from fading parameters and average SNRs (linear). `truncation` 0 selects automatic truncation.
//
// # Safety
// `bob`, `eve` must point to valid structs and `out` to writable storage.
enum FdsStatus fds_wiretap_new(const struct FdsFading *bob,
                               double snr_bob,
                               const struct FdsFading *eve,
                               double snr_eve,
                               uint32_t m_order,
                               uint32_t truncation,
                               struct FdsWiretap **out);

// Wiretap from a JSON run configuration (the CLI config schema).
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum FdsStatus fds_wiretap_from_config_json(const char *json, struct FdsWiretap **out);

// # Safety
// `w` must be null or a handle from a `fds_wiretap_*` constructor, not yet freed.
void fds_wiretap_free(struct FdsWiretap *w);

// Average SNRs (linear) of Bob and Eve.
//
// # Safety
// `w` must be a live handle; outputs writable.
enum FdsStatus fds_wiretap_snrs(const struct FdsWiretap *w, double *snr_bob, double *snr_eve);

// Average secrecy rate in bits by adaptive quadrature.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum FdsStatus fds_asr_quadrature(const struct FdsWiretap *w, double *out);

// Pr(γ_B > γ_E).
//
// # Safety
// `w` must be a live handle and `out` writable.
enum FdsStatus fds_prob_positive_secrecy(const struct FdsWiretap *w, double *out);

// Average secrecy rate with Gaussian inputs.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum FdsStatus fds_gaussian_asr(const struct FdsWiretap *w, double *out);

// Fit the exponential mixture to I_M with `k_terms` terms (0 picks the default).
//
// # Safety
// `out` must be writable.
enum FdsStatus fds_mixture_fit(uint32_t m_order, uint32_t k_terms, struct FdsMixture **out);

// Largest fit error of the mixture in bits.
//
// # Safety
// `mix` must be a live handle and `out` writable.
enum FdsStatus fds_mixture_max_error(const struct FdsMixture *mix, double *out);

// # Safety
// `mix` must be null or a live handle from [`fds_mixture_fit`].
void fds_mixture_free(struct FdsMixture *mix);

// Closed-form ASR from a fitted mixture; `bracket` receives 2𝔗·Pr(γ_B > γ_E).
//
// # Safety
// Handles must be live and outputs writable.
enum FdsStatus fds_asr_closed_form(const struct FdsWiretap *w,
                                   const struct FdsMixture *mix,
                                   double *value,
                                   double *bracket);

// High-SNR limit of the ASR and its 1/γ̄_B coefficient.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum FdsStatus fds_asr_asymptote(const struct FdsWiretap *w, struct FdsAsymptote *out);

// Secrecy outage probability at threshold `rate_bits`.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum FdsStatus fds_sop(const struct FdsWiretap *w, double rate_bits, double *out);

// High-SNR limit of the SOP and its 1/γ̄_B coefficient.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum FdsStatus fds_sop_asymptote(const struct FdsWiretap *w,
                                 double rate_bits,
                                 struct FdsAsymptote *out);

// Monte Carlo estimates; pass `rate_bits <= 0` to skip the SOP.
//
// # Safety
// `w` must be a live handle and `out` writable.
enum FdsStatus fds_monte_carlo(const struct FdsWiretap *w,
                               double rate_bits,
                               uint64_t n_samples,
                               uint64_t seed,
                               struct FdsMcResult *out);

// I_M(γ) in bits for square M-QAM.
//
// # Safety
// `out` must be writable.
enum FdsStatus fds_mi(uint32_t m_order, double snr, double *out);

// FTR density and distribution at `gamma` for average SNR `snr_avg`, with automatic truncation.
//
// # Safety
// `fading` must be valid; outputs writable.
enum FdsStatus fds_ftr_pdf_cdf(const struct FdsFading *fading,
                               double gamma,
                               double snr_avg,
                               double *pdf,
                               double *cdf);

// Normalized beampattern gain at Eve for an array steered to Bob (ranges in m, angles in rad).
//
// # Safety
// `out` must be writable.
enum FdsStatus fds_beampattern_gain(uint32_t n_elements,
                                    double carrier_hz,
                                    double offset_hz,
                                    double bob_range_m,
                                    double bob_angle_rad,
                                    double eve_range_m,
                                    double eve_angle_rad,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDA_SECRECY_H */
