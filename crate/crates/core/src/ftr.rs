//! Fluctuating two-ray (FTR) fading: series coefficients, density, distribution and sampler.
//!
//! The SNR density is a mixture of Gamma(j+1) densities with scale u = γ̄/(1+K)
//! and weights a_j = m^m K^j d_j / (Γ(m) j!).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{ln_gamma, regularized_lower_gamma_ladder, regularized_upper_gamma_ladder};
use crate::numerics::{assoc_legendre_p, special::binomial};

/// Default series truncation.
pub const DEFAULT_TRUNCATION: usize = 40;
/// Largest truncation auto-extension will try.
pub const MAX_AUTO_TRUNCATION: usize = 8192;
/// Last retained weight must be at most this fraction of the retained mass.
pub const TAIL_RATIO_LIMIT: f64 = 1e-8;
/// Auto-extension also requires the missing mass to fall below this.
pub const MISSING_MASS_LIMIT: f64 = 1e-10;
/// d_j from the Legendre sum is rejected above this relative error estimate.
pub const CANCELLATION_LIMIT: f64 = 1e-10;
// The Legendre sum costs O(j^3) per coefficient; beyond this only the phase average is used.
const LEGENDRE_MAX_J: usize = 60;

static NEGATIVE_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// Number of times a negative truncated density was clamped to zero.
pub fn negative_clamp_count() -> u64 {
    NEGATIVE_CLAMPS.load(Ordering::Relaxed)
}

/// Fading parameters of one FTR link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtrParams {
    m: u32,
    k: f64,
    delta: f64,
}

impl FtrParams {
    /// `m` fluctuation shape (integer ≥ 1), `k` specular-to-diffuse ratio, `delta` ray similarity.
    pub fn new(m: u32, k: f64, delta: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if m < 1 {
            bad.push(format!("m must be a positive integer, got {m}"));
        }
        if !(k >= 0.0 && k.is_finite()) {
            bad.push(format!("K must be finite and >= 0, got {k}"));
        }
        if !(0.0..=1.0).contains(&delta) {
            bad.push(format!("delta must lie in [0, 1], got {delta}"));
        }
        if bad.is_empty() {
            Ok(Self { m, k, delta })
        } else {
            Err(Error::InvalidParameter(bad.join("; ")))
        }
    }

    /// Rayleigh fading.
    pub fn rayleigh() -> Self {
        Self { m: 1, k: 0.0, delta: 0.0 }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Diffuse power per real dimension, 1/(2(1+K)).
    pub fn lambda_sq(&self) -> f64 {
        1.0 / (2.0 * (1.0 + self.k))
    }

    /// (m+K)² − (KΔ)²
    pub fn tau(&self) -> f64 {
        let m = f64::from(self.m);
        (m + self.k).powi(2) - (self.k * self.delta).powi(2)
    }

    /// Argument (m+K)/√τ of the Legendre factor, always ≥ 1.
    pub fn legendre_arg(&self) -> f64 {
        let m = f64::from(self.m);
        ((m + self.k) / self.tau().sqrt()).max(1.0)
    }

    fn key(&self) -> (u32, u64, u64) {
        (self.m, self.k.to_bits(), self.delta.to_bits())
    }
}

/// Series truncation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FtrSeriesConfig {
    /// Highest retained index j.
    pub truncation_j: usize,
    /// Grow the truncation until the tail guard and missing-mass limit are met.
    pub auto_extend: bool,
}

impl FtrSeriesConfig {
    pub fn fixed(truncation_j: usize) -> Self {
        Self { truncation_j, auto_extend: false }
    }

    pub fn adaptive() -> Self {
        Self { truncation_j: DEFAULT_TRUNCATION, auto_extend: true }
    }
}

impl Default for FtrSeriesConfig {
    fn default() -> Self {
        Self::fixed(DEFAULT_TRUNCATION)
    }
}

/// d_j from the double sum with associated Legendre functions.
///
/// The sum is accumulated in complex arithmetic; the imaginary residue and a
/// conditioning estimate are both checked before the real part is returned.
pub fn coeff_d(j: usize, params: &FtrParams) -> Result<f64> {
    let (value, estimate) = legendre_sum(j, params)?;
    if estimate > CANCELLATION_LIMIT {
        return Err(Error::NumericalCancellation { j, estimate });
    }
    Ok(value)
}

// Real part of the double sum and a relative error estimate.
fn legendre_sum(j: usize, params: &FtrParams) -> Result<(f64, f64)> {
    let m = params.m as usize;
    let k_ratio = params.k;
    let delta = params.delta;
    let tau = params.tau();
    let x = params.legendre_arg();
    let degree = (j + m - 1) as u32;
    let ln_tau_pow = -0.5 * (j + m) as f64 * tau.ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let half_delta = 0.5 * delta;
    // Only the k = 0 term survives when K Δ = 0.
    let k_max = if k_ratio * delta == 0.0 { 0 } else { j };
    for k in 0..=k_max {
        let outer = binomial(j as u64, k as u64) * half_delta.powi(k as i32);
        for l in 0..=k {
            let order = k as i32 - 2 * l as i32;
            let legendre = assoc_legendre_p(degree, order, x)?;
            let ln_mag = ln_gamma((j + m + 2 * l) as f64 - k as f64) + ln_tau_pow;
            let mag = outer * binomial(k as u64, l as u64) * ln_mag.exp() * legendre;
            let phase = Complex64::cis(PI * f64::from(2 * l as i32 - k as i32));
            sum += phase * mag;
            abs_sum += mag.abs();
        }
    }
    if !sum.re.is_finite() {
        return Err(Error::Overflow(format!("d_{j} Legendre sum")));
    }
    if sum.im.abs() > 1e-9 * sum.re.abs() + 1e-12 {
        return Err(Error::NumericalCancellation { j, estimate: sum.im.abs() / sum.re.abs().max(f64::MIN_POSITIVE) });
    }
    // Calibrated against the phase-average route: observed error stays below
    // ~80 eps times the condition number.
    let estimate = if sum.re > 0.0 { 256.0 * f64::EPSILON * abs_sum / sum.re } else { f64::INFINITY };
    Ok((sum.re, estimate))
}

/// d_j = Γ(j+m)/π ∫₀^π (1+Δ cos α)^j (m+K+KΔ cos α)^{−(j+m)} dα.
///
/// Equivalent to the Legendre sum and free of cancellation.
pub fn coeff_d_phase_average(j: usize, params: &FtrParams) -> f64 {
    let weights = phase_average_weights(params, j);
    let a = weights[j];
    if a == 0.0 {
        return 0.0;
    }
    (a.ln() - weight_prefactor_ln(j, params)).exp()
}

// ln(m^m K^j / (Γ(m) j!)), so that a_j = exp(this) d_j.
fn weight_prefactor_ln(j: usize, params: &FtrParams) -> f64 {
    let m = f64::from(params.m);
    m * m.ln() - ln_gamma(m) + j as f64 * params.k.ln() - ln_gamma(j as f64 + 1.0)
}

/// Mixture weights a_0..=a_jmax by averaging negative-binomial weights over the ray phase.
///
/// For a fixed phase difference α the FTR link is Rician-shadowed with weights
/// C(j+m−1, j) p^j (1−p)^m, p = K(1+Δ cos α)/(m + K(1+Δ cos α)).
/// The α-average of this smooth periodic function converges spectrally under
/// the trapezoid rule, refined by doubling until stable.
pub fn phase_average_weights(params: &FtrParams, jmax: usize) -> Vec<f64> {
    let m = f64::from(params.m);
    if params.k == 0.0 {
        let mut w = vec![0.0; jmax + 1];
        w[0] = 1.0;
        return w;
    }
    let ln_binom: Vec<f64> =
        (0..=jmax).map(|j| ln_gamma(j as f64 + m) - ln_gamma(m) - ln_gamma(j as f64 + 1.0)).collect();
    let accumulate = |alpha: f64, scale: f64, acc: &mut [f64]| {
        let s = params.k * (1.0 + params.delta * alpha.cos());
        let ln_q = m * (m / (m + s)).ln();
        if s == 0.0 {
            acc[0] += scale * ln_q.exp();
            return;
        }
        let ln_p = (s / (m + s)).ln();
        for (j, a) in acc.iter_mut().enumerate() {
            *a += scale * (ln_binom[j] + j as f64 * ln_p + ln_q).exp();
        }
    };
    // Trapezoid on [0, π]; the endpoints carry half weight.
    let mut n = 16usize;
    let mut sums = vec![0.0; jmax + 1];
    accumulate(0.0, 0.5, &mut sums);
    accumulate(PI, 0.5, &mut sums);
    for i in 1..n {
        accumulate(PI * i as f64 / n as f64, 1.0, &mut sums);
    }
    let mut current: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    loop {
        // Add the midpoints of the current grid.
        for i in 0..n {
            accumulate(PI * (2 * i + 1) as f64 / (2 * n) as f64, 1.0, &mut sums);
        }
        n *= 2;
        let next: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        let settled = next.iter().zip(&current).all(|(a, b)| (a - b).abs() <= 1e-14 * a + 1e-300);
        current = next;
        if settled || n >= 1 << 20 {
            return current;
        }
    }
}

/// Which route produced a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightSource {
    Legendre,
    PhaseAverage,
}

/// Truncated FTR mixture for one parameter set, shared through a global cache.
#[derive(Debug, Clone, PartialEq)]
pub struct FtrSeries {
    params: FtrParams,
    weights: Vec<f64>,
    ln_weights: Vec<f64>,
    ln_factorials: Vec<f64>,
    sources: Vec<WeightSource>,
    tail_ratio: f64,
    missing_mass: f64,
}

impl FtrSeries {
    /// Build (or fetch from cache) the truncated series.
    pub fn new(params: &FtrParams, cfg: &FtrSeriesConfig) -> Result<Arc<FtrSeries>> {
        type Cache = Mutex<HashMap<((u32, u64, u64), FtrSeriesConfig), Arc<FtrSeries>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (params.key(), *cfg);
        if let Some(hit) = cache.lock().expect("series cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let built = Arc::new(Self::build(params, cfg)?);
        cache.lock().expect("series cache poisoned").insert(key, built.clone());
        Ok(built)
    }

    fn build(params: &FtrParams, cfg: &FtrSeriesConfig) -> Result<FtrSeries> {
        let mut truncation = cfg.truncation_j;
        loop {
            let series = Self::with_truncation(params, truncation);
            let ok_tail = series.tail_ratio <= TAIL_RATIO_LIMIT;
            if !cfg.auto_extend {
                if ok_tail {
                    return Ok(series);
                }
                return Err(Error::TruncationInsufficient { truncation, tail_ratio: series.tail_ratio });
            }
            if ok_tail && series.missing_mass <= MISSING_MASS_LIMIT {
                return Ok(series);
            }
            if truncation >= MAX_AUTO_TRUNCATION {
                return Err(Error::TruncationInsufficient { truncation, tail_ratio: series.tail_ratio });
            }
            truncation = (2 * truncation.max(8)).min(MAX_AUTO_TRUNCATION);
        }
    }

    fn with_truncation(params: &FtrParams, jmax: usize) -> FtrSeries {
        let fallback = phase_average_weights(params, jmax);
        let mut weights = Vec::with_capacity(jmax + 1);
        let mut sources = Vec::with_capacity(jmax + 1);
        // Conditioning of the Legendre sum only worsens with j.
        let mut legendre_ok = params.k > 0.0;
        for (j, &avg) in fallback.iter().enumerate() {
            if params.k == 0.0 {
                weights.push(avg);
                sources.push(WeightSource::PhaseAverage);
                continue;
            }
            let legendre =
                if legendre_ok && j <= LEGENDRE_MAX_J { coeff_d(j, params).ok().filter(|d| *d > 0.0) } else { None };
            match legendre {
                Some(d) => {
                    weights.push((weight_prefactor_ln(j, params) + d.ln()).exp());
                    sources.push(WeightSource::Legendre);
                }
                None => {
                    if legendre_ok && j <= LEGENDRE_MAX_J {
                        log::debug!("d_{j} for {params:?}: Legendre sum ill-conditioned, using phase average");
                    }
                    legendre_ok = false;
                    weights.push(avg);
                    sources.push(WeightSource::PhaseAverage);
                }
            }
        }
        let total: f64 = weights.iter().sum();
        let tail_ratio = weights[jmax] / total;
        FtrSeries {
            params: *params,
            ln_weights: weights.iter().map(|w| w.ln()).collect(),
            ln_factorials: (0..=jmax).map(|j| ln_gamma(j as f64 + 1.0)).collect(),
            weights,
            sources,
            tail_ratio,
            missing_mass: (1.0 - total).max(0.0),
        }
    }

    pub fn params(&self) -> &FtrParams {
        &self.params
    }

    /// Mixture weights a_j.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sources(&self) -> &[WeightSource] {
        &self.sources
    }

    pub fn truncation(&self) -> usize {
        self.weights.len() - 1
    }

    /// a_J / Σ a_j at the truncation index.
    pub fn tail_ratio(&self) -> f64 {
        self.tail_ratio
    }

    /// 1 − Σ a_j.
    pub fn missing_mass(&self) -> f64 {
        self.missing_mass
    }

    /// Slope of the CDF at the origin in units of 1/γ̄: F(γ) ≈ a_0 (1+K) γ/γ̄.
    pub fn origin_slope(&self) -> f64 {
        self.weights[0] * (1.0 + self.params.k)
    }

    // Normalized argument γ/u, formed so that γ̄ enters only through γ/γ̄.
    fn scaled(&self, gamma: f64, gamma_bar: f64) -> f64 {
        (gamma / gamma_bar) * (1.0 + self.params.k)
    }

    pub fn pdf(&self, gamma: f64, gamma_bar: f64) -> f64 {
        if gamma < 0.0 {
            return 0.0;
        }
        let x = self.scaled(gamma, gamma_bar);
        let per_u = (1.0 + self.params.k) / gamma_bar;
        if x == 0.0 {
            return self.weights[0] * per_u;
        }
        if x.is_infinite() {
            return 0.0;
        }
        let ln_x = x.ln();
        let mut sum = 0.0;
        for (j, (&lw, &lf)) in self.ln_weights.iter().zip(&self.ln_factorials).enumerate() {
            let e = lw + j as f64 * ln_x - x - lf;
            if e > -745.0 {
                sum += e.exp();
            }
        }
        let v = sum * per_u;
        if v < 0.0 {
            NEGATIVE_CLAMPS.fetch_add(1, Ordering::Relaxed);
            return 0.0;
        }
        v
    }

    pub fn cdf(&self, gamma: f64, gamma_bar: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let x = self.scaled(gamma, gamma_bar);
        if x.is_infinite() {
            return (1.0 - self.missing_mass).clamp(0.0, 1.0);
        }
        let ladder = regularized_lower_gamma_ladder(x, self.truncation()).expect("x is nonnegative");
        let v: f64 = self.weights.iter().zip(&ladder).map(|(a, p)| a * p).sum();
        v.clamp(0.0, 1.0)
    }

    /// 1 − cdf, accurate when the CDF is close to one.
    pub fn sf(&self, gamma: f64, gamma_bar: f64) -> f64 {
        if gamma <= 0.0 {
            return 1.0;
        }
        let x = self.scaled(gamma, gamma_bar);
        if x.is_infinite() {
            return self.missing_mass;
        }
        let ladder = regularized_upper_gamma_ladder(x, self.truncation()).expect("x is nonnegative");
        let v: f64 = self.weights.iter().zip(&ladder).map(|(a, q)| a * q).sum::<f64>() + self.missing_mass;
        v.clamp(0.0, 1.0)
    }
}

fn check_snr(gamma_bar: f64) -> Result<()> {
    if gamma_bar > 0.0 && gamma_bar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("average SNR must be positive and finite, got {gamma_bar}")))
    }
}

/// Density of the instantaneous SNR.
pub fn ftr_pdf(gamma: f64, params: &FtrParams, gamma_bar: f64, cfg: &FtrSeriesConfig) -> Result<f64> {
    check_snr(gamma_bar)?;
    Ok(FtrSeries::new(params, cfg)?.pdf(gamma, gamma_bar))
}

/// Distribution function of the instantaneous SNR.
pub fn ftr_cdf(gamma: f64, params: &FtrParams, gamma_bar: f64, cfg: &FtrSeriesConfig) -> Result<f64> {
    check_snr(gamma_bar)?;
    Ok(FtrSeries::new(params, cfg)?.cdf(gamma, gamma_bar))
}

/// Generative FTR model: two fluctuating specular rays plus diffuse Gaussian scatter.
#[derive(Debug, Clone)]
pub struct FtrSampler {
    v1: f64,
    v2: f64,
    diffuse: Normal<f64>,
    shadowing: Gamma<f64>,
    gamma_bar: f64,
}

impl FtrSampler {
    pub fn new(params: &FtrParams, gamma_bar: f64) -> Result<Self> {
        if !(gamma_bar >= 0.0 && gamma_bar.is_finite()) {
            return Err(Error::InvalidParameter(format!("average SNR must be finite and >= 0, got {gamma_bar}")));
        }
        let specular = params.k / (1.0 + params.k);
        let sum = (specular * (1.0 + params.delta)).sqrt();
        let diff = (specular * (1.0 - params.delta)).sqrt();
        let m = f64::from(params.m);
        Ok(Self {
            v1: 0.5 * (sum + diff),
            v2: 0.5 * (sum - diff),
            diffuse: Normal::new(0.0, params.lambda_sq().sqrt()).expect("positive deviation"),
            shadowing: Gamma::new(m, 1.0 / m).expect("positive shape"),
            gamma_bar,
        })
    }

    /// Unit-mean channel power |h|².
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let zeta: f64 = self.shadowing.sample(rng);
        let phi1 = rng.random::<f64>() * 2.0 * PI;
        let phi2 = rng.random::<f64>() * 2.0 * PI;
        let amp = zeta.sqrt();
        let re = amp * (self.v1 * phi1.cos() + self.v2 * phi2.cos()) + self.diffuse.sample(rng);
        let im = amp * (self.v1 * phi1.sin() + self.v2 * phi2.sin()) + self.diffuse.sample(rng);
        re * re + im * im
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.gamma_bar * self.sample_power(rng)
    }
}

/// One SNR draw. Build an [`FtrSampler`] once when drawing many.
pub fn ftr_sample<R: Rng + ?Sized>(params: &FtrParams, gamma_bar: f64, rng: &mut R) -> Result<f64> {
    Ok(FtrSampler::new(params, gamma_bar)?.sample(rng))
}
