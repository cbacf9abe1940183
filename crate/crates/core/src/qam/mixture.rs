//! Exponential-mixture approximation log₂M (1 − Σ ζ_j e^{−ϑ_j γ}) of QAM mutual information.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::QamConstellation;
use crate::error::{Error, Result};

/// Fit and validation grid: log-spaced γ in [1e-3, 1e3].
pub const FIT_GRID: (f64, f64) = (1e-3, 1e3);
const FIT_POINTS: usize = 400;
const CHECK_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMixture {
    m_order: usize,
    weights: Vec<f64>,
    rates: Vec<f64>,
    max_err_bits: f64,
}

impl ExpMixture {
    pub fn new(m_order: usize, weights: Vec<f64>, rates: Vec<f64>, max_err_bits: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if !matches!(m_order, 4 | 16 | 64 | 256) {
            bad.push(format!("m_order must be one of 4, 16, 64, 256, got {m_order}"));
        }
        if weights.is_empty() || weights.len() != rates.len() {
            bad.push(format!("need matching nonempty weights and rates, got {} and {}", weights.len(), rates.len()));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            bad.push("weights must be positive".into());
        }
        if rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            bad.push("rates must be positive".into());
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            bad.push(format!("weights must sum to 1, got {total}"));
        }
        if !(max_err_bits >= 0.0 && max_err_bits.is_finite()) {
            bad.push(format!("max_err_bits must be >= 0, got {max_err_bits}"));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParameter(bad.join("; ")));
        }
        Ok(Self { m_order, weights, rates, max_err_bits })
    }

    pub fn m_order(&self) -> usize {
        self.m_order
    }

    pub fn k_terms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Uniform error bound measured against the exact mutual information.
    pub fn max_err_bits(&self) -> f64 {
        self.max_err_bits
    }

    pub fn log2_m(&self) -> f64 {
        (self.m_order as f64).log2()
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        let tail: f64 = self.weights.iter().zip(&self.rates).map(|(z, r)| z * (-r * gamma).exp()).sum();
        self.log2_m() * (1.0 - tail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mixture serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ExpMixture =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("mixture JSON: {e}")))?;
        Self::new(raw.m_order, raw.weights, raw.rates, raw.max_err_bits)
    }
}

/// Î_M(γ) = log₂M (1 − Σ ζ_j e^{−ϑ_j γ}).
pub fn mi_approx(gamma: f64, mixture: &ExpMixture) -> f64 {
    mixture.eval(gamma)
}

/// Number of terms used when none is requested.
pub fn default_k_terms(m_order: usize) -> usize {
    match m_order {
        4 => 4,
        16 => 6,
        64 => 8,
        _ => 10,
    }
}

fn log_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = (FIT_GRID.0.ln(), FIT_GRID.1.ln());
    (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
}

// Parameters: ln ϑ_1..k followed by softmax logits b_2..k (b_1 = 0).
fn unpack(p: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let rates: Vec<f64> = p[..k].iter().map(|x| x.exp()).collect();
    let mut logits = vec![0.0];
    logits.extend_from_slice(&p[k..]);
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|b| (b - top).exp()).collect();
    let total: f64 = exps.iter().sum();
    (exps.iter().map(|e| e / total).collect(), rates)
}

fn residuals_and_jacobian(
    p: &[f64],
    k: usize,
    grid: &[f64],
    target: &[f64],
    log2m: f64,
) -> (DVector<f64>, DMatrix<f64>) {
    let (zeta, rates) = unpack(p, k);
    let n = grid.len();
    let mut r = DVector::zeros(n);
    let mut jac = DMatrix::zeros(n, 2 * k - 1);
    for (i, &g) in grid.iter().enumerate() {
        let e: Vec<f64> = rates.iter().map(|t| (-t * g).exp()).collect();
        let mix: f64 = zeta.iter().zip(&e).map(|(z, x)| z * x).sum();
        r[i] = log2m * (1.0 - mix) - target[i];
        for q in 0..k {
            jac[(i, q)] = log2m * zeta[q] * rates[q] * g * e[q];
        }
        for l in 1..k {
            jac[(i, k + l - 1)] = -log2m * zeta[l] * (e[l] - mix);
        }
    }
    (r, jac)
}

// Levenberg–Marquardt on the sum of squares, from one starting point.
fn levenberg_marquardt(mut p: Vec<f64>, k: usize, grid: &[f64], target: &[f64], log2m: f64) -> Vec<f64> {
    let mut lambda = 1e-3;
    let (mut r, mut jac) = residuals_and_jacobian(&p, k, grid, target, log2m);
    let mut cost = r.norm_squared();
    for _ in 0..400 {
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += lambda * (jtj[(d, d)] + 1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let (r2, j2) = residuals_and_jacobian(&trial, k, grid, target, log2m);
            let c2 = r2.norm_squared();
            if c2.is_finite() && c2 < cost {
                let rel = (cost - c2) / cost;
                p = trial;
                r = r2;
                jac = j2;
                cost = c2;
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel > 1e-12;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    p
}

/// Least-squares fit of a k-term mixture to the exact mutual information.
///
/// Positivity of the weights and rates and Σζ = 1 are built into the
/// parametrization. Several deterministic starts are tried and the one with
/// the smallest uniform error on the check grid is kept.
pub fn fit_exp_mixture(constellation: &QamConstellation, k_terms: usize) -> Result<ExpMixture> {
    if k_terms < 2 {
        return Err(Error::InvalidParameter(format!("mixture needs at least 2 terms, got {k_terms}")));
    }
    let log2m = constellation.log2_m();
    let grid = log_grid(FIT_POINTS);
    let target: Vec<f64> = grid.iter().map(|&g| constellation.mi(g)).collect();
    let check = log_grid(CHECK_POINTS);
    let check_target: Vec<f64> = check.iter().map(|&g| constellation.mi(g)).collect();
    let d_m = constellation.min_distance_rate();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    // Rates spread geometrically around the minimum-distance decay rate.
    for (lo, hi) in [(0.1, 10.0), (0.3, 3.0), (0.05, 30.0), (0.5, 5.0), (0.02, 2.0), (0.2, 50.0)] {
        let mut p: Vec<f64> = (0..k_terms)
            .map(|q| {
                let t = if k_terms == 1 { 0.5 } else { q as f64 / (k_terms - 1) as f64 };
                (d_m * lo * (hi / lo).powf(t)).ln()
            })
            .collect();
        p.extend(std::iter::repeat_n(0.0, k_terms - 1));
        let fitted = levenberg_marquardt(p, k_terms, &grid, &target, log2m);
        let (zeta, rates) = unpack(&fitted, k_terms);
        let probe = ExpMixture {
            m_order: constellation.m_order(),
            weights: zeta.clone(),
            rates: rates.clone(),
            max_err_bits: 0.0,
        };
        let err = check.iter().zip(&check_target).fold(0.0f64, |a, (&g, &t)| a.max((probe.eval(g) - t).abs()));
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, zeta, rates));
        }
    }
    let (err, zeta, rates) = best.expect("at least one start");
    let (weights, rates) = canonical(zeta, rates);
    // Renormalization moves the fit by at most an ulp; re-measure anyway.
    let mut mixture = ExpMixture { m_order: constellation.m_order(), weights, rates, max_err_bits: err };
    mixture.max_err_bits =
        check.iter().zip(&check_target).fold(0.0f64, |a, (&g, &t)| a.max((mixture.eval(g) - t).abs()));
    let limit = 1e-2 * log2m;
    if !(mixture.max_err_bits <= limit) {
        return Err(Error::FitFailure { max_err_bits: mixture.max_err_bits, limit });
    }
    Ok(mixture)
}

/// Fit with the default term count, adding terms until the error limit is met.
pub fn fit_exp_mixture_default(constellation: &QamConstellation) -> Result<ExpMixture> {
    let mut k = default_k_terms(constellation.m_order());
    loop {
        match fit_exp_mixture(constellation, k) {
            Err(Error::FitFailure { .. }) if k < 16 => k += 1,
            other => return other,
        }
    }
}

// Sort by rate and make the weights sum to exactly 1.0.
fn canonical(zeta: Vec<f64>, rates: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut pairs: Vec<(f64, f64)> = zeta.into_iter().zip(rates).collect();
    pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (mut w, r): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let last = w.len() - 1;
    for _ in 0..8 {
        let rest: f64 = w[..last].iter().sum();
        w[last] = 1.0 - rest;
        if w.iter().sum::<f64>() == 1.0 {
            break;
        }
        w[last] = w[last].next_up();
        if w.iter().sum::<f64>() == 1.0 {
            break;
        }
    }
    (w, r)
}
