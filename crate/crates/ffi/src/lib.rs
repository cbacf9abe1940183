//! C ABI over the `fda-secrecy` library.
//!
//! Every function returns an [`FdsStatus`]; on failure the message is available
//! from [`fds_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their `_free` function.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fda_secrecy::config::RunConfig;
use fda_secrecy::fda::{beampattern_gain, ArrayConfig, NodeGeometry};
use fda_secrecy::ftr::{FtrParams, FtrSeries, FtrSeriesConfig};
use fda_secrecy::montecarlo::{mc_secrecy, McEstimate};
use fda_secrecy::qam::{ExpMixture, QamConstellation};
use fda_secrecy::secrecy::{self, AsymptoteReport, Wiretap};
use fda_secrecy::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Configuration text failed to parse or validate.
    Config = 3,
    /// A numerical guard fired (truncation, cancellation, quadrature, consistency).
    Numerical = 4,
    /// The metric is undefined when Eve's average SNR is zero.
    DegenerateEve = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FdsStatus {
    match e {
        Error::DegenerateEve => FdsStatus::DegenerateEve,
        e if e.is_numerical_guard() => FdsStatus::Numerical,
        _ => FdsStatus::InvalidArgument,
    }
}

// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (FdsStatus, String)>) -> FdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FdsStatus::Panic
        }
    }
}

fn lib<T>(r: fda_secrecy::Result<T>) -> Result<T, (FdsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, (FdsStatus, String)> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or((FdsStatus::NullPointer, "output pointer is null".into()))
}

fn in_ptr<'a, T>(p: *const T) -> Result<&'a T, (FdsStatus, String)> {
    // SAFETY: the caller passes either null or a valid pointer.
    unsafe { p.as_ref() }.ok_or((FdsStatus::NullPointer, "input pointer is null".into()))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
///
/// Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fds_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: `buf` holds at least `len` bytes and `n < len`.
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fading parameters (m, K, Δ) of one link.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FdsFading {
    pub m: u32,
    pub k: f64,
    pub delta: f64,
}

impl FdsFading {
    fn params(&self) -> Result<FtrParams, (FdsStatus, String)> {
        lib(FtrParams::new(self.m, self.k, self.delta))
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FdsAsymptote {
    pub limit_value: f64,
    pub slope_coeff: f64,
    pub chi_b: f64,
}

impl From<AsymptoteReport> for FdsAsymptote {
    fn from(r: AsymptoteReport) -> Self {
        Self { limit_value: r.limit_value, slope_coeff: r.slope_coeff, chi_b: r.chi_b }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FdsMcEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl From<McEstimate> for FdsMcEstimate {
    fn from(e: McEstimate) -> Self {
        Self { mean: e.mean, std_error: e.std_error, n_samples: e.n_samples, seed: e.seed }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FdsMcResult {
    pub asr: FdsMcEstimate,
    pub p_pos: FdsMcEstimate,
    pub gaussian_asr: FdsMcEstimate,
    /// Valid only when `has_sop` is true.
    pub sop: FdsMcEstimate,
    pub has_sop: bool,
}

/// Opaque Bob/Eve link pair with its constellation.
pub struct FdsWiretap {
    inner: Wiretap,
}

/// Opaque fitted exponential mixture.
pub struct FdsMixture {
    inner: ExpMixture,
}

fn series_config(truncation: u32) -> FtrSeriesConfig {
    if truncation == 0 {
        FtrSeriesConfig::adaptive()
    } else {
        FtrSeriesConfig::fixed(truncation as usize)
    }
}

/// Wiretap from fading parameters and average SNRs (linear). `truncation` 0 selects automatic truncation.
///
/// # Safety
/// `bob`, `eve` must point to valid structs and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn fds_wiretap_new(
    bob: *const FdsFading,
    snr_bob: f64,
    eve: *const FdsFading,
    snr_eve: f64,
    m_order: u32,
    truncation: u32,
    out: *mut *mut FdsWiretap,
) -> FdsStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let bob = in_ptr(bob)?.params()?;
        let eve = in_ptr(eve)?.params()?;
        let w = lib(Wiretap::from_snrs((bob, snr_bob), (eve, snr_eve), m_order as usize, &series_config(truncation)))?;
        *out = Box::into_raw(Box::new(FdsWiretap { inner: w }));
        Ok(())
    })
}

/// Wiretap from a JSON run configuration (the CLI config schema).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_wiretap_from_config_json(json: *const c_char, out: *mut *mut FdsWiretap) -> FdsStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if json.is_null() {
            return Err((FdsStatus::NullPointer, "config text is null".into()));
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (FdsStatus::Config, format!("config is not UTF-8: {e}")))?;
        let cfg = RunConfig::from_json_str(text).map_err(|e| (FdsStatus::Config, e.to_string()))?;
        let w = lib(cfg.scenario().and_then(|s| s.resolve()))?;
        *out = Box::into_raw(Box::new(FdsWiretap { inner: w }));
        Ok(())
    })
}

/// # Safety
/// `w` must be null or a handle from a `fds_wiretap_*` constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fds_wiretap_free(w: *mut FdsWiretap) {
    if !w.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(w) });
    }
}

/// Average SNRs (linear) of Bob and Eve.
///
/// # Safety
/// `w` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fds_wiretap_snrs(w: *const FdsWiretap, snr_bob: *mut f64, snr_eve: *mut f64) -> FdsStatus {
    guard(|| {
        let w = &in_ptr(w)?.inner;
        *out_ptr(snr_bob)? = w.bob().avg_snr();
        *out_ptr(snr_eve)? = w.eve().avg_snr();
        Ok(())
    })
}

unsafe fn scalar(
    w: *const FdsWiretap,
    out: *mut f64,
    metric: impl FnOnce(&Wiretap) -> fda_secrecy::Result<f64>,
) -> FdsStatus {
    guard(|| {
        let w = &in_ptr(w)?.inner;
        let out = out_ptr(out)?;
        *out = lib(metric(w))?;
        Ok(())
    })
}

/// Average secrecy rate in bits by adaptive quadrature.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_asr_quadrature(w: *const FdsWiretap, out: *mut f64) -> FdsStatus {
    scalar(w, out, |w| secrecy::asr_quadrature(w).map(|r| r.value))
}

/// Pr(γ_B > γ_E).
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_prob_positive_secrecy(w: *const FdsWiretap, out: *mut f64) -> FdsStatus {
    scalar(w, out, secrecy::prob_positive_secrecy)
}

/// Average secrecy rate with Gaussian inputs.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_gaussian_asr(w: *const FdsWiretap, out: *mut f64) -> FdsStatus {
    scalar(w, out, |w| secrecy::gaussian_asr(w).map(|r| r.value))
}

/// Fit the exponential mixture to I_M with `k_terms` terms (0 picks the default).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fds_mixture_fit(m_order: u32, k_terms: u32, out: *mut *mut FdsMixture) -> FdsStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let qam = lib(QamConstellation::new(m_order as usize))?;
        let mix = if k_terms == 0 {
            lib(fda_secrecy::qam::fit_exp_mixture_default(&qam))?
        } else {
            lib(fda_secrecy::qam::fit_exp_mixture(&qam, k_terms as usize))?
        };
        *out = Box::into_raw(Box::new(FdsMixture { inner: mix }));
        Ok(())
    })
}

/// Largest fit error of the mixture in bits.
///
/// # Safety
/// `mix` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_mixture_max_error(mix: *const FdsMixture, out: *mut f64) -> FdsStatus {
    guard(|| {
        *out_ptr(out)? = in_ptr(mix)?.inner.max_err_bits();
        Ok(())
    })
}

/// # Safety
/// `mix` must be null or a live handle from [`fds_mixture_fit`].
#[no_mangle]
pub unsafe extern "C" fn fds_mixture_free(mix: *mut FdsMixture) {
    if !mix.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(mix) });
    }
}

/// Closed-form ASR from a fitted mixture; `bracket` receives 2𝔗·Pr(γ_B > γ_E).
///
/// # Safety
/// Handles must be live and outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fds_asr_closed_form(
    w: *const FdsWiretap,
    mix: *const FdsMixture,
    value: *mut f64,
    bracket: *mut f64,
) -> FdsStatus {
    guard(|| {
        let w = &in_ptr(w)?.inner;
        let mix = &in_ptr(mix)?.inner;
        let value = out_ptr(value)?;
        let bracket = out_ptr(bracket)?;
        let r = lib(secrecy::asr_closed_form(w, mix))?;
        *value = r.value;
        *bracket = r.error_estimate;
        Ok(())
    })
}

/// High-SNR limit of the ASR and its 1/γ̄_B coefficient.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_asr_asymptote(w: *const FdsWiretap, out: *mut FdsAsymptote) -> FdsStatus {
    guard(|| {
        let w = &in_ptr(w)?.inner;
        *out_ptr(out)? = lib(secrecy::asr_asymptote(w))?.into();
        Ok(())
    })
}

/// Secrecy outage probability at threshold `rate_bits`.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_sop(w: *const FdsWiretap, rate_bits: f64, out: *mut f64) -> FdsStatus {
    guard(|| {
        let w = &in_ptr(w)?.inner;
        *out_ptr(out)? = lib(secrecy::sop(w, rate_bits))?.value;
        Ok(())
    })
}

/// High-SNR limit of the SOP and its 1/γ̄_B coefficient.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_sop_asymptote(w: *const FdsWiretap, rate_bits: f64, out: *mut FdsAsymptote) -> FdsStatus {
    guard(|| {
        let w = &in_ptr(w)?.inner;
        *out_ptr(out)? = lib(secrecy::sop_asymptote(w, rate_bits))?.into();
        Ok(())
    })
}

/// Monte Carlo estimates; pass `rate_bits <= 0` to skip the SOP.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fds_monte_carlo(
    w: *const FdsWiretap,
    rate_bits: f64,
    n_samples: u64,
    seed: u64,
    out: *mut FdsMcResult,
) -> FdsStatus {
    guard(|| {
        let w = &in_ptr(w)?.inner;
        let out = out_ptr(out)?;
        let rate = (rate_bits > 0.0).then_some(rate_bits);
        let mc = lib(mc_secrecy(w, rate, n_samples, seed))?;
        *out = FdsMcResult {
            asr: mc.asr.into(),
            p_pos: mc.p_pos.into(),
            gaussian_asr: mc.gaussian_asr.into(),
            sop: mc.sop.map(Into::into).unwrap_or_default(),
            has_sop: mc.sop.is_some(),
        };
        Ok(())
    })
}

/// I_M(γ) in bits for square M-QAM.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fds_mi(m_order: u32, snr: f64, out: *mut f64) -> FdsStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if !(snr >= 0.0) {
            return Err((FdsStatus::InvalidArgument, format!("SNR must be >= 0, got {snr}")));
        }
        *out = lib(QamConstellation::new(m_order as usize))?.mi(snr);
        Ok(())
    })
}

/// FTR density and distribution at `gamma` for average SNR `snr_avg`, with automatic truncation.
///
/// # Safety
/// `fading` must be valid; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fds_ftr_pdf_cdf(
    fading: *const FdsFading,
    gamma: f64,
    snr_avg: f64,
    pdf: *mut f64,
    cdf: *mut f64,
) -> FdsStatus {
    guard(|| {
        let params = in_ptr(fading)?.params()?;
        let pdf = out_ptr(pdf)?;
        let cdf = out_ptr(cdf)?;
        if !(snr_avg > 0.0 && gamma >= 0.0) {
            return Err((
                FdsStatus::InvalidArgument,
                format!("need snr_avg > 0 and gamma >= 0, got {snr_avg}, {gamma}"),
            ));
        }
        let series = lib(FtrSeries::new(&params, &FtrSeriesConfig::adaptive()))?;
        *pdf = series.pdf(gamma, snr_avg);
        *cdf = series.cdf(gamma, snr_avg);
        Ok(())
    })
}

/// Normalized beampattern gain at Eve for an array steered to Bob (ranges in m, angles in rad).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fds_beampattern_gain(
    n_elements: u32,
    carrier_hz: f64,
    offset_hz: f64,
    bob_range_m: f64,
    bob_angle_rad: f64,
    eve_range_m: f64,
    eve_angle_rad: f64,
    out: *mut f64,
) -> FdsStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let array = lib(ArrayConfig::new(n_elements as usize, carrier_hz, offset_hz))?;
        let bob = lib(NodeGeometry::new(bob_range_m, bob_angle_rad))?;
        let eve = lib(NodeGeometry::new(eve_range_m, eve_angle_rad))?;
        *out = beampattern_gain(&array, &bob, &eve);
        Ok(())
    })
}
