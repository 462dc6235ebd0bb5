//! C ABI for `polarfade`.
//!
//! Every fallible function returns a [`PfStatus`]. On failure a description
//! is available from [`pf_last_error_message`] on the same thread. Codes and
//! fading models are opaque handles released with their `_free` function.
//! Panics never cross the boundary; they are reported as `PF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use polarfade::capacity::{
    bi_awgn_capacity, optimize_design_power, solve_design_power, QuadratureSpec,
};
use polarfade::construction::construct;
use polarfade::fading::FadingModel;
use polarfade::polar::{encode, sc_decode, PolarCode, Soft};
use polarfade::power::{erasure_prob, make_policy, PowerBudget};
use polarfade::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    InvalidArgument = 1,
    Numeric = 2,
    Infeasible = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Opaque polar code handle.
pub struct PfCode {
    code: PolarCode,
}

/// Opaque fading model handle.
pub struct PfFading {
    model: FadingModel,
}

/// Truncated inversion thresholds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PfPolicy {
    pub delta: f64,
    pub delta_bar: f64,
    pub delta_peak: f64,
}

/// Rate-optimal design point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PfOptimum {
    pub p_star: f64,
    pub r_star: f64,
    pub eps_star: f64,
    pub objective: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(PfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => PfStatus::InvalidArgument,
            Error::Numeric { .. } => PfStatus::Numeric,
            Error::Infeasible(_) => PfStatus::Infeasible,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PfStatus::NullPointer, format!("{what} is null"))
}

fn bad(msg: String) -> Failure {
    Failure(PfStatus::InvalidArgument, msg)
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PfStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn code_ref<'a>(code: *const PfCode) -> Result<&'a PolarCode, Failure> {
    code.as_ref().map(|c| &c.code).ok_or_else(|| null("code"))
}

unsafe fn fading_ref<'a>(fading: *const PfFading) -> Result<&'a FadingModel, Failure> {
    fading
        .as_ref()
        .map(|f| &f.model)
        .ok_or_else(|| null("fading"))
}

/// Message for the most recent failure on this thread; empty after success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Constructs an `(2^log_n, k)` code for design SNR `P/σ²`; `mixture_eps > 0`
/// designs for the AWGN-plus-erasure mixture.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_code_construct(
    log_n: u32,
    k: usize,
    design_snr: f64,
    mixture_eps: f64,
    out: *mut *mut PfCode,
) -> PfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if log_n > 24 {
            return Err(bad(format!("log_n={log_n} too large")));
        }
        let code = construct(1usize << log_n, k, design_snr, mixture_eps)?;
        out.write(Box::into_raw(Box::new(PfCode { code })));
        Ok(())
    })
}

/// # Safety
/// `code` must be null or a handle from [`pf_code_construct`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_code_free(code: *mut PfCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Blocklength `N`, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_code_blocklength(code: *const PfCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.n())
}

/// Number of information bits `K`, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_code_dimension(code: *const PfCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.k())
}

/// Copies the 0-based, ascending information set into `out[0..len]`; `len` must equal `K`.
///
/// # Safety
/// `code` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pf_code_info_set(
    code: *const PfCode,
    out: *mut usize,
    len: usize,
) -> PfStatus {
    guard(|| {
        let code = code_ref(code)?;
        if len != code.k() {
            return Err(bad(format!("buffer length {len} != K={}", code.k())));
        }
        if len > 0 {
            if out.is_null() {
                return Err(null("output buffer"));
            }
            slice::from_raw_parts_mut(out, len).copy_from_slice(code.info_set());
        }
        Ok(())
    })
}

/// Encodes `k` message bits (each 0 or 1) into `n = N` codeword bits.
///
/// # Safety
/// `message` must be readable for `k` bytes and `codeword` writable for `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn pf_encode(
    code: *const PfCode,
    message: *const u8,
    k: usize,
    codeword: *mut u8,
    n: usize,
) -> PfStatus {
    guard(|| {
        let code = code_ref(code)?;
        if k != code.k() || n != code.n() {
            return Err(bad(format!(
                "lengths ({k}, {n}) != (K, N) = ({}, {})",
                code.k(),
                code.n()
            )));
        }
        if codeword.is_null() || (k > 0 && message.is_null()) {
            return Err(null("buffer"));
        }
        let msg = if k == 0 {
            &[][..]
        } else {
            slice::from_raw_parts(message, k)
        };
        let x = encode(msg, code)?;
        slice::from_raw_parts_mut(codeword, n).copy_from_slice(&x);
        Ok(())
    })
}

/// Successive cancellation decoding from `n = N` channel LLRs (positive
/// favours bit 0). A NaN entry marks an erased symbol. Writes `k` bits.
///
/// # Safety
/// `llr` must be readable for `n` values and `message` writable for `k` bytes.
#[no_mangle]
pub unsafe extern "C" fn pf_sc_decode(
    code: *const PfCode,
    llr: *const f64,
    n: usize,
    message: *mut u8,
    k: usize,
) -> PfStatus {
    guard(|| {
        let code = code_ref(code)?;
        if k != code.k() || n != code.n() {
            return Err(bad(format!(
                "lengths ({n}, {k}) != (N, K) = ({}, {})",
                code.n(),
                code.k()
            )));
        }
        if llr.is_null() || (k > 0 && message.is_null()) {
            return Err(null("buffer"));
        }
        let obs: Vec<Soft> = slice::from_raw_parts(llr, n)
            .iter()
            .map(|&l| {
                if l.is_nan() {
                    Soft::Erased
                } else {
                    Soft::Llr(l)
                }
            })
            .collect();
        let u = sc_decode(&obs, code)?;
        if k > 0 {
            slice::from_raw_parts_mut(message, k).copy_from_slice(&u);
        }
        Ok(())
    })
}

/// BPSK-over-AWGN capacity in bits at power `p`, noise variance `sigma2`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pf_bi_awgn_capacity(p: f64, sigma2: f64, out: *mut f64) -> PfStatus {
    guard(|| {
        write_out(
            out,
            bi_awgn_capacity(p, sigma2, &QuadratureSpec::default())?,
        )
    })
}

/// Power `P` with capacity `rate`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pf_solve_design_power(rate: f64, sigma2: f64, out: *mut f64) -> PfStatus {
    guard(|| {
        write_out(
            out,
            solve_design_power(rate, sigma2, &QuadratureSpec::default())?,
        )
    })
}

unsafe fn new_fading(model: FadingModel, out: *mut *mut PfFading) -> PfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        model.validate()?;
        out.write(Box::into_raw(Box::new(PfFading { model })));
        Ok(())
    })
}

/// Real Gaussian gain `N(0, sigma_h2)`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_fading_new_gaussian(
    sigma_h2: f64,
    out: *mut *mut PfFading,
) -> PfStatus {
    new_fading(FadingModel::GaussianReal { sigma_h2 }, out)
}

/// Rayleigh-distributed gain with the given scale.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_fading_new_rayleigh(scale: f64, out: *mut *mut PfFading) -> PfStatus {
    new_fading(FadingModel::Rayleigh { scale }, out)
}

/// Deterministic gain `h0`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_fading_new_point_mass(h0: f64, out: *mut *mut PfFading) -> PfStatus {
    new_fading(FadingModel::PointMass { h0 }, out)
}

/// `|H|` uniform on `[lo, hi]` with a symmetric random sign.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pf_fading_new_uniform_abs(
    lo: f64,
    hi: f64,
    out: *mut *mut PfFading,
) -> PfStatus {
    new_fading(FadingModel::UniformAbs { lo, hi }, out)
}

/// # Safety
/// `fading` must be null or a handle from a `pf_fading_new_*` function not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pf_fading_free(fading: *mut PfFading) {
    if !fading.is_null() {
        drop(Box::from_raw(fading));
    }
}

/// Inversion thresholds for design power `p` under average budget `q` and
/// peak budget `q_peak` (pass `INFINITY` for none).
///
/// # Safety
/// `fading` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pf_make_policy(
    p: f64,
    q: f64,
    q_peak: f64,
    sigma2: f64,
    fading: *const PfFading,
    out: *mut PfPolicy,
) -> PfStatus {
    guard(|| {
        let fading = fading_ref(fading)?;
        let pol = make_policy(
            &PowerBudget {
                p,
                q,
                q_peak,
                sigma2,
            },
            fading,
            &QuadratureSpec::default(),
        )?;
        write_out(
            out,
            PfPolicy {
                delta: pol.delta,
                delta_bar: pol.delta_bar,
                delta_peak: pol.delta_peak,
            },
        )
    })
}

/// `P(|H| < delta)`.
///
/// # Safety
/// `fading` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pf_erasure_prob(
    delta: f64,
    fading: *const PfFading,
    out: *mut f64,
) -> PfStatus {
    guard(|| write_out(out, erasure_prob(delta, fading_ref(fading)?)?))
}

/// Design power maximizing `(1 − ε)·C(P)` for budget `q`.
///
/// # Safety
/// `fading` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn pf_optimize_design_power(
    q: f64,
    q_peak: f64,
    sigma2: f64,
    fading: *const PfFading,
    out: *mut PfOptimum,
) -> PfStatus {
    guard(|| {
        let fading = fading_ref(fading)?;
        let opt = optimize_design_power(q, q_peak, sigma2, fading, &QuadratureSpec::default())?;
        write_out(
            out,
            PfOptimum {
                p_star: opt.p_star,
                r_star: opt.r_star,
                eps_star: opt.eps_star,
                objective: opt.objective,
            },
        )
    })
}
