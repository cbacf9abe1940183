//! Associated Legendre functions of the first kind off the cut (x ≥ 1).

use super::special::ln_gamma;
use crate::error::{Error, Result};

/// P_ν^μ(x) for integer degree ν ≥ 0, integer order μ, and x ≥ 1.
///
/// Uses the convention that is real for x > 1, with no (−1)^μ factor:
/// P_μ^μ(x) = (2μ−1)!! (x²−1)^{μ/2}, then upward recurrence in degree.
/// Negative orders use P_ν^{−μ} = Γ(ν−μ+1)/Γ(ν+μ+1) · P_ν^μ.
pub fn assoc_legendre_p(degree: u32, order: i32, x: f64) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Legendre argument must satisfy x >= 1, got {x}")));
    }
    let nu = degree;
    let mu = order.unsigned_abs();
    if x == 1.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if mu > nu {
        if order > 0 {
            // Derivative of order above the polynomial degree.
            return Ok(0.0);
        }
        return negative_order_above_degree(nu, mu, x);
    }
    let positive = positive_order(nu, mu, x)?;
    if order >= 0 {
        return Ok(positive);
    }
    let ratio = (ln_gamma(f64::from(nu - mu) + 1.0) - ln_gamma(f64::from(nu + mu) + 1.0)).exp();
    Ok(ratio * positive)
}

fn positive_order(nu: u32, mu: u32, x: f64) -> Result<f64> {
    let xm1xp1 = (x - 1.0) * (x + 1.0);
    // ln of (2μ-1)!! (x²-1)^{μ/2}
    let mut ln_pmm = 0.5 * f64::from(mu) * xm1xp1.ln();
    for i in 1..=mu {
        ln_pmm += f64::from(2 * i - 1).ln();
    }
    let pmm = ln_pmm.exp();
    if !pmm.is_finite() {
        return Err(overflow(nu, mu, x));
    }
    if nu == mu {
        return Ok(pmm);
    }
    let mut prev = pmm;
    let mut cur = x * f64::from(2 * mu + 1) * pmm;
    for l in (mu + 1)..nu {
        let next = (f64::from(2 * l + 1) * x * cur - f64::from(l + mu) * prev) / f64::from(l - mu + 1);
        prev = cur;
        cur = next;
        if !cur.is_finite() {
            return Err(overflow(nu, mu, x));
        }
    }
    Ok(cur)
}

// P_ν^{−μ}(x) = ((x−1)/(x+1))^{μ/2} / Γ(1+μ) · ₂F₁(−ν, ν+1; 1+μ; (1−x)/2).
// The series terminates after ν+1 terms and has no poles since 1+μ > 0.
fn negative_order_above_degree(nu: u32, mu: u32, x: f64) -> Result<f64> {
    let z = 0.5 * (1.0 - x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let a = -f64::from(nu);
    let b = f64::from(nu) + 1.0;
    let c = f64::from(mu) + 1.0;
    for k in 0..nu {
        let kf = f64::from(k);
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
    }
    let pre = 0.5 * f64::from(mu) * ((x - 1.0) / (x + 1.0)).ln() - ln_gamma(c);
    let v = pre.exp() * sum;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(overflow(nu, mu, x))
    }
}

fn overflow(nu: u32, mu: u32, x: f64) -> Error {
    Error::Overflow(format!("associated Legendre P_{nu}^{mu}({x})"))
}
