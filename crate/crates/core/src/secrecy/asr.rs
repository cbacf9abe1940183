use super::{AsymptoteReport, Method, SecrecyResult, Wiretap};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_semi_infinite, Integral, Tolerance};
use crate::qam::{ExpMixture, QamConstellation};

/// Tolerance for the reference integrals; far tighter than any comparison downstream.
pub(crate) const REFERENCE_TOL: Tolerance = Tolerance::new(1e-13, 1e-9);

/// max{I_M(γ_B) − I_M(γ_E), 0}.
pub fn instantaneous_secrecy_rate(gamma_b: f64, gamma_e: f64, qam: &QamConstellation) -> f64 {
    if gamma_b <= gamma_e {
        return 0.0;
    }
    (qam.mi(gamma_b) - qam.mi(gamma_e)).max(0.0)
}

fn integrate(w: &Wiretap, f: impl Fn(f64) -> f64) -> Result<Integral> {
    integrate_semi_infinite(f, &w.breakpoints(), REFERENCE_TOL)
}

/// Pr(γ_B > γ_E) = ∫ F_E f_B.
pub fn prob_positive_secrecy(w: &Wiretap) -> Result<f64> {
    if !w.eve().is_active() {
        return Ok(1.0);
    }
    let (bob, eve) = (w.bob(), w.eve());
    let r = integrate(w, |g| eve.cdf(g) * bob.pdf(g))?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Integral representation used by [`asr_quadrature_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsrForm {
    /// ∫ S_M F_E (1 − F_B); every term is nonnegative.
    Slope,
    /// ∫ gap f_E − ∫ S_M F_B F_E.
    Split,
    /// ∫ I_M [f_B F_E + f_E F_B] − ∫ I_M f_E.
    Direct,
}

/// Average secrecy rate by adaptive quadrature of its defining integral.
pub fn asr_quadrature(w: &Wiretap) -> Result<SecrecyResult> {
    asr_quadrature_with(w, AsrForm::Slope)
}

pub fn asr_quadrature_with(w: &Wiretap, form: AsrForm) -> Result<SecrecyResult> {
    let (bob, eve, qam) = (w.bob(), w.eve(), w.qam());
    let r = match form {
        AsrForm::Slope => integrate(w, |g| {
            let f_e = eve.cdf(g);
            if f_e == 0.0 {
                return 0.0;
            }
            let sf_b = bob.sf(g);
            if sf_b == 0.0 {
                return 0.0;
            }
            qam.mi_slope(g) * f_e * sf_b
        })?,
        AsrForm::Split => {
            let limit = eve_limit(w)?;
            let gap = asr_gap_to_limit(w)?;
            Integral { value: limit.value - gap.value, error: limit.error + gap.error }
        }
        AsrForm::Direct => {
            let both = integrate(w, |g| qam.mi(g) * (bob.pdf(g) * eve.cdf(g) + eve.pdf(g) * bob.cdf(g)))?;
            let eve_only = integrate(w, |g| qam.mi(g) * eve.pdf(g))?;
            Integral { value: both.value - eve_only.value, error: both.error + eve_only.error }
        }
    };
    Ok(SecrecyResult::new(r.value.max(0.0), Method::Quadrature, r.error))
}

/// ∫ S_M F_B F_E, the shortfall of the ASR below its high-SNR limit.
pub fn asr_gap_to_limit(w: &Wiretap) -> Result<Integral> {
    let (bob, eve, qam) = (w.bob(), w.eve(), w.qam());
    integrate(w, |g| {
        let f = bob.cdf(g) * eve.cdf(g);
        if f == 0.0 {
            0.0
        } else {
            f * qam.mi_slope(g)
        }
    })
}

// log₂M − ∫ I_M f_E written as ∫ gap f_E.
fn eve_limit(w: &Wiretap) -> Result<Integral> {
    let (eve, qam) = (w.eve(), w.qam());
    if !eve.is_active() {
        return Ok(Integral { value: qam.log2_m(), error: 0.0 });
    }
    integrate(w, |g| {
        let p = eve.pdf(g);
        if p == 0.0 {
            0.0
        } else {
            qam.gap(g) * p
        }
    })
}

/// Limit of the ASR as γ̄_B → ∞ and the coefficient of its 1/γ̄_B correction.
pub fn asr_asymptote(w: &Wiretap) -> Result<AsymptoteReport> {
    let (eve, qam) = (w.eve(), w.qam());
    let chi_b = w.bob().series().origin_slope();
    let limit = eve_limit(w)?;
    let moment = integrate(w, |g| {
        let f = eve.cdf(g);
        if f == 0.0 {
            0.0
        } else {
            g * f * qam.mi_slope(g)
        }
    })?;
    Ok(AsymptoteReport { limit_value: limit.value, slope_coeff: chi_b * moment.value, chi_b })
}

/// Mixture-based closed form: log₂M Σ_q ζ_q P(ϑ_q) with P = ∫A₃ − ∫A₁ − ∫A₂ summed term by term.
///
/// The error estimate is the bracket 2𝔗·Pr(γ_B > γ_E) from the mixture fit error 𝔗.
pub fn asr_closed_form(w: &Wiretap, mixture: &ExpMixture) -> Result<SecrecyResult> {
    if mixture.m_order() != w.qam().m_order() {
        return Err(Error::InvalidParameter(format!(
            "mixture fitted for M = {} used with M = {}",
            mixture.m_order(),
            w.qam().m_order()
        )));
    }
    if !w.eve().is_active() {
        return Err(Error::DegenerateEve);
    }
    let (bob, eve) = (w.bob(), w.eve());
    let (u_b, u_e) = (bob.scale(), eve.scale());
    let a_b = bob.series().weights();
    let a_e = eve.series().weights();
    let tail_b = suffix_sums(a_b);
    let tail_e = suffix_sums(a_e);
    let mass_e = tail_e[0];
    let mass_b = tail_b[0];

    let mut total = 0.0;
    for (&zeta, &rate) in mixture.weights().iter().zip(mixture.rates()) {
        let c = rate + 1.0 / u_b + 1.0 / u_e;
        let x = 1.0 / (u_b * c);
        let y = 1.0 / (u_e * c);
        // ∫A₃ = Σ_k a_k^E/(1 + u_E ϑ)^{k+1}
        let a3 = geometric_moment(a_e, 1.0 / (1.0 + u_e * rate));
        // ∫A₁: F_E expanded as mass − e^{−x/u_E}Σ_{l≤k}; inner sums over k collapse to suffix sums.
        let a1 = mass_e * geometric_moment(a_b, 1.0 / (1.0 + u_b * rate)) - x * cross_sum(a_b, &tail_e, x, y);
        let a2 = mass_b * a3 - y * cross_sum(a_e, &tail_b, y, x);
        total += zeta * (a3 - a1 - a2);
    }
    let value = (mixture.log2_m() * total).max(0.0);
    let p_pos = prob_positive_secrecy(w)?;
    let bracket = 2.0 * mixture.max_err_bits() * p_pos;
    Ok(SecrecyResult::new(value, Method::ClosedForm, bracket)
        .with("bracket", bracket)
        .with("prob_positive", p_pos)
        .with("truncation_bob", bob.series().truncation() as f64)
        .with("truncation_eve", eve.series().truncation() as f64))
}

fn suffix_sums(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    let mut acc = 0.0;
    for (o, v) in out.iter_mut().zip(a).rev() {
        acc += v;
        *o = acc;
    }
    out
}

// Σ_j a_j r^{j+1}
fn geometric_moment(a: &[f64], r: f64) -> f64 {
    let mut p = r;
    let mut s = 0.0;
    for v in a {
        s += v * p;
        p *= r;
    }
    s
}

// Σ_j a_j Σ_l tails_l C(j+l, l) x^j y^l. When x + y is close to 1 the binomial terms stay O(1) for rows
// far beyond where x^j underflows, so each row carries its magnitude as a separate log scale.
fn cross_sum(a: &[f64], tails: &[f64], x: f64, y: f64) -> f64 {
    const RESCALE: f64 = 1e150;
    let ln_x = x.ln();
    let mut s = 0.0;
    for (j, aj) in a.iter().enumerate() {
        if *aj == 0.0 {
            continue;
        }
        let mut log_scale = j as f64 * ln_x;
        let mut factor = log_scale.exp();
        let mut t = 1.0;
        let mut inner = 0.0;
        for (l, tl) in tails.iter().enumerate() {
            if l > 0 {
                let ratio = y * (j + l) as f64 / l as f64;
                t *= ratio;
                if !(1.0 / RESCALE..=RESCALE).contains(&t) {
                    log_scale += t.ln();
                    factor = log_scale.exp();
                    t = 1.0;
                }
                // past the peak of the row and below anything representable
                if ratio < 1.0 && log_scale + t.ln() < -745.0 {
                    break;
                }
            }
            inner += tl * t * factor;
        }
        s += aj * inner;
    }
    s
}

/// ASR with Gaussian inputs, E[max{log₂(1+γ_B) − log₂(1+γ_E), 0}] = ∫ F_E (1 − F_B)/((1+γ) ln 2).
pub fn gaussian_asr(w: &Wiretap) -> Result<SecrecyResult> {
    let (bob, eve) = (w.bob(), w.eve());
    let r = integrate_semi_infinite(
        |g| {
            let f = eve.cdf(g) * bob.sf(g);
            if f == 0.0 {
                0.0
            } else {
                f / ((1.0 + g) * std::f64::consts::LN_2)
            }
        },
        &w.breakpoints(),
        REFERENCE_TOL,
    )?;
    Ok(SecrecyResult::new(r.value.max(0.0), Method::Quadrature, r.error))
}
