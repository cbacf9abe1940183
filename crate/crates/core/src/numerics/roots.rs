//! Bracketed root finding for monotone maps.

use crate::error::{Error, Result};

/// Default absolute tolerance for [`bisect_monotone`].
pub const DEFAULT_BISECTION_TOL: f64 = 1e-10;

/// Stopping rule for [`bisect_monotone_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionStop {
    /// Stop once |f(x) − target| is at most this.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than `x_abs + x_rel·|x|`.
    pub x_abs: f64,
    pub x_rel: f64,
    pub max_iter: usize,
}

/// Solve f(x) = target for monotone f on [lo, hi], stopping on either tolerance.
pub fn bisect_monotone(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect_monotone_with(f, target, lo, hi, BisectionStop { f_tol: tol, x_abs: tol, x_rel: 0.0, max_iter: 400 })
}

pub fn bisect_monotone_with(
    f: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    stop: BisectionStop,
) -> Result<f64> {
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    let increasing = f_hi >= f_lo;
    let (min, max) = if increasing { (f_lo, f_hi) } else { (f_hi, f_lo) };
    if !(target >= min && target <= max) {
        return Err(Error::Bracket { target, f_lo, f_hi });
    }
    if f_lo == target {
        return Ok(lo);
    }
    if f_hi == target {
        return Ok(hi);
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..stop.max_iter {
        mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm - target).abs() <= stop.f_tol {
            return Ok(mid);
        }
        if (fm < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= stop.x_abs + stop.x_rel * mid.abs() || mid <= lo && mid >= hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity() {
        assert_abs_diff_eq!(bisect_monotone(|x| x, 0.5, 0.0, 1.0, 1e-12).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cube() {
        assert_abs_diff_eq!(bisect_monotone(|x| x * x * x, 8.0, 0.0, 3.0, 1e-12).unwrap(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn decreasing() {
        assert_abs_diff_eq!(bisect_monotone(|x| -x, -0.25, 0.0, 1.0, 1e-12).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn not_bracketed() {
        assert!(matches!(bisect_monotone(|x| x, 2.0, 0.0, 1.0, 1e-10), Err(Error::Bracket { .. })));
    }
}
