#ifndef POLARFADE_H
#define POLARFADE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_INVALID_ARGUMENT = 1,
  PF_STATUS_NUMERIC = 2,
  PF_STATUS_INFEASIBLE = 3,
  PF_STATUS_NULL_POINTER = 4,
  PF_STATUS_PANIC = 5,
} PfStatus;

// Opaque polar code handle.
typedef struct PfCode PfCode;

// Opaque fading model handle.
typedef struct PfFading PfFading;

// Truncated inversion thresholds.
typedef struct PfPolicy {
  double delta;
  double delta_bar;
  double delta_peak;
} PfPolicy;

// Rate-optimal design point.
typedef struct PfOptimum {
  double p_star;
  double r_star;
  double eps_star;
  double objective;
} PfOptimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after success.
// The pointer stays valid until the next call into this library on the same thread.
const char *pf_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *pf_version(void);

// Constructs an `(2^log_n, k)` code for design SNR `P/σ²`; `mixture_eps > 0`
// designs for the AWGN-plus-erasure mixture.
//
// # Safety
// `out` must be valid for writing one pointer.
enum PfStatus pf_code_construct(uint32_t log_n,
                                size_t k,
                                double design_snr,
                                double mixture_eps,
                                struct PfCode **out);

// # Safety
// `code` must be null or a handle from [`pf_code_construct`] not yet freed.
void pf_code_free(struct PfCode *code);

// Blocklength `N`, or 0 for a null handle.
//
// # Safety
// `code` must be null or a live handle.
size_t pf_code_blocklength(const struct PfCode *code);

// Number of information bits `K`, or 0 for a null handle.
//
// # Safety
// `code` must be null or a live handle.
size_t pf_code_dimension(const struct PfCode *code);

// Copies the 0-based, ascending information set into `out[0..len]`; `len` must equal `K`.
//
// # Safety
// `code` must be a live handle and `out` valid for `len` writes.
enum PfStatus pf_code_info_set(const struct PfCode *code, size_t *out, size_t len);

// Encodes `k` message bits (each 0 or 1) into `n = N` codeword bits.
//
// # Safety
// `message` must be readable for `k` bytes and `codeword` writable for `n` bytes.
enum PfStatus pf_encode(const struct PfCode *code,
                        const uint8_t *message,
                        size_t k,
                        uint8_t *codeword,
                        size_t n);

// Successive cancellation decoding from `n = N` channel LLRs (positive
// favours bit 0). A NaN entry marks an erased symbol. Writes `k` bits.
//
// # Safety
// `llr` must be readable for `n` values and `message` writable for `k` bytes.
enum PfStatus pf_sc_decode(const struct PfCode *code,
                           const double *llr,
                           size_t n,
                           uint8_t *message,
                           size_t k);

// BPSK-over-AWGN capacity in bits at power `p`, noise variance `sigma2`.
//
// # Safety
// `out` must be valid for writing.
enum PfStatus pf_bi_awgn_capacity(double p, double sigma2, double *out);

// Power `P` with capacity `rate`.
//
// # Safety
// `out` must be valid for writing.
enum PfStatus pf_solve_design_power(double rate, double sigma2, double *out);

// Real Gaussian gain `N(0, sigma_h2)`.
//
// # Safety
// `out` must be valid for writing one pointer.
enum PfStatus pf_fading_new_gaussian(double sigma_h2, struct PfFading **out);

// Rayleigh-distributed gain with the given scale.
//
// # Safety
// `out` must be valid for writing one pointer.
enum PfStatus pf_fading_new_rayleigh(double scale, struct PfFading **out);

// Deterministic gain `h0`.
//
// # Safety
// `out` must be valid for writing one pointer.
enum PfStatus pf_fading_new_point_mass(double h0, struct PfFading **out);

// `|H|` uniform on `[lo, hi]` with a symmetric random sign.
//
// # Safety
// `out` must be valid for writing one pointer.
enum PfStatus pf_fading_new_uniform_abs(double lo, double hi, struct PfFading **out);

// # Safety
// `fading` must be null or a handle from a `pf_fading_new_*` function not yet freed.
void pf_fading_free(struct PfFading *fading);

// Inversion thresholds for design power `p` under average budget `q` and
// peak budget `q_peak` (pass `INFINITY` for none).
//
// # Safety
// `fading` must be a live handle and `out` valid for writing.
enum PfStatus pf_make_policy(double p,
                             double q,
                             double q_peak,
                             double sigma2,
                             const struct PfFading *fading,
                             struct PfPolicy *out);

// `P(|H| < delta)`.
//
// # Safety
// `fading` must be a live handle and `out` valid for writing.
enum PfStatus pf_erasure_prob(double delta, const struct PfFading *fading, double *out);

// Design power maximizing `(1 − ε)·C(P)` for budget `q`.
//
// # Safety
// `fading` must be a live handle and `out` valid for writing.
enum PfStatus pf_optimize_design_power(double q,
                                       double q_peak,
                                       double sigma2,
                                       const struct PfFading *fading,
                                       struct PfOptimum *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLARFADE_H */
