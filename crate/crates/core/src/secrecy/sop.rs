use super::{AsymptoteReport, Method, SecrecyResult, Wiretap};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{
    cached_rule, integrate_adaptive, integrate_semi_infinite, scale_breakpoints, RuleKind, Tolerance,
};
use crate::numerics::special::{ln_gamma, regularized_lower_gamma_ladder};

/// Largest accepted |sop_series − sop|.
pub const SERIES_CONSISTENCY_LIMIT: f64 = 1e-3;

const SLOPE_TOL: Tolerance = Tolerance::new(1e-12, 1e-8);

fn check_rate(rate_bits: f64) -> Result<()> {
    if !(rate_bits > 0.0 && rate_bits.is_finite()) {
        return Err(Error::InvalidParameter(format!("rate threshold must be positive, got {rate_bits}")));
    }
    Ok(())
}

// Threshold H with I_M(H) = log₂M − R_s.
fn threshold(w: &Wiretap, rate_bits: f64) -> Result<f64> {
    w.qam().inverse_gap(rate_bits)
}

// Bob SNR with I_M equal to I_M(γ) + R_s; infinite once that reaches log₂M.
fn bob_snr_needed(w: &Wiretap, gamma: f64, rate_bits: f64) -> Result<f64> {
    let target_gap = w.qam().gap(gamma) - rate_bits;
    if target_gap <= 0.0 {
        return Ok(f64::INFINITY);
    }
    w.qam().inverse_gap(target_gap)
}

fn outage_sum(w: &Wiretap, eve_ceiling: f64, rate_bits: f64, order: usize) -> Result<f64> {
    let (bob, eve) = (w.bob(), w.eve());
    let rule = cached_rule(RuleKind::Legendre, order);
    let mut acc = 0.0;
    for (g, wt) in rule.mapped(0.0, eve_ceiling) {
        let dens = eve.pdf(g);
        if dens == 0.0 {
            continue;
        }
        acc += wt * bob.cdf(bob_snr_needed(w, g, rate_bits)?) * dens;
    }
    Ok(acc)
}

/// Secrecy outage probability Pr(I_s < R_s) = 1 − F_E(H) + ∫₀^H F_B(φ_M(γ)) f_E(γ) dγ.
///
/// The integral uses the order-V Gauss–Legendre rule; the error estimate is the
/// change when the order is doubled.
pub fn sop(w: &Wiretap, rate_bits: f64) -> Result<SecrecyResult> {
    check_rate(rate_bits)?;
    if rate_bits >= w.qam().log2_m() {
        return Ok(SecrecyResult::new(1.0, Method::Quadrature, 0.0));
    }
    let eve_ceiling = threshold(w, rate_bits)?;
    if !w.eve().is_active() {
        let value = w.bob().cdf(bob_snr_needed(w, 0.0, rate_bits)?);
        return Ok(SecrecyResult::new(value, Method::Quadrature, 0.0).with("threshold_h", eve_ceiling));
    }
    let v = w.quadrature_v();
    let coarse = outage_sum(w, eve_ceiling, rate_bits, v)?;
    let fine = outage_sum(w, eve_ceiling, rate_bits, 2 * v)?;
    let value = (w.eve().sf(eve_ceiling) + coarse).clamp(0.0, 1.0);
    Ok(SecrecyResult::new(value, Method::Quadrature, (fine - coarse).abs())
        .with("threshold_h", eve_ceiling)
        .with("quadrature_v", v as f64))
}

/// Power of u_E in the Eve factor of the double-series terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesDenominator {
    /// u_E^{k+1}, which makes each term a Gamma(k+1, u_E) density.
    PerOrder,
    /// u_E² for every k, a fixed normalisation that ignores the order.
    Squared,
}

/// Double-series SOP with each P_k integral on the order-V Gauss–Legendre rule.
///
/// Fails with [`Error::Consistency`] when it strays from [`sop`] by more than
/// [`SERIES_CONSISTENCY_LIMIT`].
pub fn sop_series(w: &Wiretap, rate_bits: f64) -> Result<SecrecyResult> {
    let series = sop_series_with(w, rate_bits, SeriesDenominator::PerOrder)?;
    let reference = sop(w, rate_bits)?;
    let deviation = (series.value - reference.value).abs();
    if deviation > SERIES_CONSISTENCY_LIMIT {
        return Err(Error::Consistency { deviation, limit: SERIES_CONSISTENCY_LIMIT });
    }
    Ok(series.with("deviation", deviation))
}

/// Double-series SOP without the consistency gate.
pub fn sop_series_with(w: &Wiretap, rate_bits: f64, denominator: SeriesDenominator) -> Result<SecrecyResult> {
    check_rate(rate_bits)?;
    if !w.eve().is_active() {
        return Err(Error::DegenerateEve);
    }
    if rate_bits >= w.qam().log2_m() {
        return Ok(SecrecyResult::new(1.0, Method::ClosedForm, 0.0));
    }
    let (bob, eve) = (w.bob(), w.eve());
    let (u_b, u_e) = (bob.scale(), eve.scale());
    let a_b = bob.series().weights();
    let a_e = eve.series().weights();
    let eve_ceiling = threshold(w, rate_bits)?;

    let below_ceiling = regularized_lower_gamma_ladder(eve_ceiling / u_e, a_e.len() - 1)?;
    let head = 1.0 - a_e.iter().zip(&below_ceiling).map(|(a, p)| a * p).sum::<f64>();

    let rule = cached_rule(RuleKind::Legendre, w.quadrature_v());
    let nodes: Vec<(f64, f64)> = rule.mapped(0.0, eve_ceiling).collect();
    // P(j+1, φ(γ_i)/u_B) per node.
    let mut bob_ladders = Vec::with_capacity(nodes.len());
    for (g, _) in &nodes {
        let x = bob_snr_needed(w, *g, rate_bits)?;
        bob_ladders.push(if x.is_finite() {
            regularized_lower_gamma_ladder(x / u_b, a_b.len() - 1)?
        } else {
            vec![1.0; a_b.len()]
        });
    }
    let ln_u = u_e.ln();
    let mut total = 0.0;
    for (j, ab) in a_b.iter().enumerate() {
        for (k, ae) in a_e.iter().enumerate() {
            let ln_den = ln_gamma(k as f64 + 1.0)
                + match denominator {
                    SeriesDenominator::PerOrder => (k as f64 + 1.0) * ln_u,
                    SeriesDenominator::Squared => 2.0 * ln_u,
                };
            let p_k: f64 = nodes
                .iter()
                .zip(&bob_ladders)
                .map(|((g, wt), ladder)| wt * ladder[j] * (k as f64 * g.ln() - g / u_e - ln_den).exp())
                .sum();
            total += ab * ae * p_k;
        }
    }
    let value = (head + total).clamp(0.0, 1.0);
    Ok(SecrecyResult::new(value, Method::ClosedForm, 0.0)
        .with("threshold_h", eve_ceiling)
        .with("truncation_bob", a_b.len() as f64 - 1.0)
        .with("truncation_eve", a_e.len() as f64 - 1.0))
}

/// High-SNR SOP: limit 1 − F_E(H) and coefficient Φ_M = χ_B ∫₀^H φ_M f_E.
pub fn sop_asymptote(w: &Wiretap, rate_bits: f64) -> Result<AsymptoteReport> {
    check_rate(rate_bits)?;
    let max_bits = w.qam().log2_m();
    if rate_bits >= max_bits {
        return Err(Error::MiRange { target: rate_bits, max_bits });
    }
    let chi_b = w.bob().series().origin_slope();
    let eve_ceiling = threshold(w, rate_bits)?;
    let eve = w.eve();
    if !eve.is_active() {
        return Ok(AsymptoteReport {
            limit_value: 0.0,
            slope_coeff: chi_b * bob_snr_needed(w, 0.0, rate_bits)?,
            chi_b,
        });
    }
    let integral = integrate_adaptive(
        |g| {
            let d = eve.pdf(g);
            if d == 0.0 {
                return 0.0;
            }
            match bob_snr_needed(w, g, rate_bits) {
                Ok(x) if x.is_finite() => x * d,
                _ => 0.0,
            }
        },
        0.0,
        eve_ceiling,
        SLOPE_TOL,
    )?;
    Ok(AsymptoteReport { limit_value: eve.sf(eve_ceiling), slope_coeff: chi_b * integral.value, chi_b })
}

/// Φ_M through the substitution γ = ρ_M(x) = I_M^{-1}(I_M(x) − R_s), integrating over x ≥ I_M^{-1}(R_s).
pub fn sop_asymptote_slope_rho(w: &Wiretap, rate_bits: f64) -> Result<f64> {
    check_rate(rate_bits)?;
    let qam = w.qam();
    let max_bits = qam.log2_m();
    if rate_bits >= max_bits {
        return Err(Error::MiRange { target: rate_bits, max_bits });
    }
    let chi_b = w.bob().series().origin_slope();
    let x0 = qam.inverse_gap(max_bits - rate_bits)?;
    let eve = w.eve();
    if !eve.is_active() {
        return Ok(chi_b * x0);
    }
    let breaks = scale_breakpoints(&[1.0 / qam.min_distance_rate(), eve.avg_snr()]);
    let r = integrate_semi_infinite(
        |t| {
            let x = x0 + t;
            let s_x = qam.mi_slope(x);
            if s_x == 0.0 {
                return 0.0;
            }
            let target = qam.gap(x) + rate_bits;
            let rho = if target >= max_bits { 0.0 } else { qam.inverse_gap(target).unwrap_or(0.0) };
            let s_rho = qam.mi_slope(rho);
            x * eve.pdf(rho) * s_x / s_rho
        },
        &breaks,
        SLOPE_TOL,
    )?;
    Ok(chi_b * r.value)
}
