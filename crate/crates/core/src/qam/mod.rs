//! Mutual information of square M-QAM over a complex Gaussian channel.
//!
//! Square M-QAM is the product of two √M-PAM constellations with power 1/2 per
//! dimension, so I_M(γ) = 2 I_PAM(γ) and only one-dimensional Gauss–Hermite
//! sums are needed. The full two-dimensional sum is kept for cross-checks.

mod mixture;

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{cached_rule, QuadratureRule, RuleKind, DEFAULT_HERMITE_ORDER};
use crate::numerics::{bisect_monotone_with, BisectionStop};

pub use mixture::{default_k_terms, fit_exp_mixture, fit_exp_mixture_default, mi_approx, ExpMixture, FIT_GRID};

/// Square QAM with unit average power and Gray labels.
#[derive(Debug, Clone)]
pub struct QamConstellation {
    m_order: usize,
    levels: Vec<f64>,
    points: Vec<Complex64>,
    rule: Arc<QuadratureRule>,
}

impl PartialEq for QamConstellation {
    fn eq(&self, other: &Self) -> bool {
        self.m_order == other.m_order && self.rule.order() == other.rule.order()
    }
}

impl QamConstellation {
    pub fn new(m_order: usize) -> Result<Self> {
        Self::with_hermite_order(m_order, DEFAULT_HERMITE_ORDER)
    }

    pub fn with_hermite_order(m_order: usize, hermite_order: usize) -> Result<Self> {
        if !matches!(m_order, 4 | 16 | 64 | 256) {
            return Err(Error::InvalidParameter(format!("M must be one of 4, 16, 64, 256, got {m_order}")));
        }
        if hermite_order < 2 {
            return Err(Error::InvalidParameter(format!("Hermite order must be >= 2, got {hermite_order}")));
        }
        let side = (m_order as f64).sqrt().round() as usize;
        let bits_per_dim = side.trailing_zeros();
        // Per-dimension power 1/2: levels (2i − L + 1)·s with s² = 3/(2(L²−1)).
        let step = (1.5 / ((side * side - 1) as f64)).sqrt();
        let levels: Vec<f64> = (0..side).map(|i| (2.0 * i as f64 - side as f64 + 1.0) * step).collect();
        let gray_to_index = |g: usize| {
            let mut b = g;
            let mut shift = 1;
            while shift < bits_per_dim as usize {
                b ^= b >> shift;
                shift <<= 1;
            }
            b
        };
        let points = (0..m_order)
            .map(|label| {
                let i_bits = label >> bits_per_dim;
                let q_bits = label & (side - 1);
                Complex64::new(levels[gray_to_index(i_bits)], levels[gray_to_index(q_bits)])
            })
            .collect();
        Ok(Self { m_order, levels, points, rule: cached_rule(RuleKind::Hermite, hermite_order) })
    }

    pub fn m_order(&self) -> usize {
        self.m_order
    }

    pub fn log2_m(&self) -> f64 {
        (self.m_order as f64).log2()
    }

    /// Symbols indexed by their Gray label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Per-dimension PAM amplitudes.
    pub fn pam_levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn hermite_order(&self) -> usize {
        self.rule.order()
    }

    /// d_M = 3/(2(M−1)), half the squared minimum distance.
    pub fn min_distance_rate(&self) -> f64 {
        1.5 / (self.m_order as f64 - 1.0)
    }

    /// log₂M − I_M(γ), computed directly so it keeps relative accuracy near saturation.
    pub fn gap(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return self.log2_m();
        }
        (2.0 * pam_gap(&self.levels, &self.rule, gamma)).clamp(0.0, self.log2_m())
    }

    /// I_M(γ) in bits.
    pub fn mi(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        (self.log2_m() - self.gap(gamma)).clamp(0.0, self.log2_m())
    }

    /// I_M(γ) from the two-dimensional Gauss–Hermite product rule, without the PAM factorization.
    pub fn mi_tensor(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let sg = gamma.sqrt();
        let nodes = self.rule.nodes();
        let weights = self.rule.weights();
        let mut total = 0.0;
        for sj in &self.points {
            let mut acc = 0.0;
            for (tr, wr) in nodes.iter().zip(weights) {
                for (ti, wi) in nodes.iter().zip(weights) {
                    let t = Complex64::new(*tr, *ti);
                    let t2 = t.norm_sqr();
                    let s: f64 = self
                        .points
                        .iter()
                        .filter(|sk| *sk != sj)
                        .map(|sk| (t2 - (t + sg * (sj - sk)).norm_sqr()).exp())
                        .sum();
                    acc += wr * wi * s.ln_1p();
                }
            }
            total += acc / PI;
        }
        let gap = total / (self.m_order as f64 * LN_2);
        (self.log2_m() - gap).clamp(0.0, self.log2_m())
    }

    /// S_M(γ) = dI_M/dγ in bits, by a fourth-order central difference with step max(1e-4, 1e-3 γ).
    pub fn mi_slope(&self, gamma: f64) -> f64 {
        let gamma = gamma.max(0.0);
        let h = (1e-3 * gamma).max(1e-4);
        let v = if gamma >= 2.0 * h {
            (8.0 * (self.gap(gamma - h) - self.gap(gamma + h)) - self.gap(gamma - 2.0 * h) + self.gap(gamma + 2.0 * h))
                / (12.0 * h)
        } else {
            // One-sided second-order stencil at the origin.
            (3.0 * self.gap(gamma) - 4.0 * self.gap(gamma + h) + self.gap(gamma + 2.0 * h)) / (2.0 * h)
        };
        v.max(0.0)
    }

    /// Minimum mean-square error of the symbol estimate at SNR γ.
    pub fn mmse(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 1.0;
        }
        2.0 * pam_mmse(&self.levels, &self.rule, gamma)
    }

    /// γ with I_M(γ) = target, by bisection.
    pub fn mi_inverse(&self, target_bits: f64) -> Result<f64> {
        let max_bits = self.log2_m();
        if !(0.0..max_bits).contains(&target_bits) {
            return Err(Error::MiRange { target: target_bits, max_bits });
        }
        self.inverse_gap(max_bits - target_bits)
    }

    /// γ with log₂M − I_M(γ) = gap_bits; accurate for gaps far below one bit.
    pub fn inverse_gap(&self, gap_bits: f64) -> Result<f64> {
        let max_bits = self.log2_m();
        if !(gap_bits > 0.0 && gap_bits <= max_bits) {
            return Err(Error::MiRange { target: max_bits - gap_bits, max_bits });
        }
        if gap_bits == max_bits {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.gap(hi) > gap_bits {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::MiRange { target: max_bits - gap_bits, max_bits });
            }
        }
        let stop = BisectionStop { f_tol: 0.0, x_abs: 1e-300, x_rel: 1e-13, max_iter: 400 };
        // Bisect on log(gap), which is smooth and well scaled over the whole range.
        let target = gap_bits.ln();
        bisect_monotone_with(|g| self.gap(g).max(1e-300).ln(), target, 0.0, hi, stop)
    }
}

// Per-dimension gap (1/L) Σ_j E log₂(1 + Σ_{k≠j} exp(−2tδ − δ²)), δ = √γ(a_j − a_k).
fn pam_gap(levels: &[f64], rule: &QuadratureRule, gamma: f64) -> f64 {
    let sg = gamma.sqrt();
    let mut total = 0.0;
    for (j, aj) in levels.iter().enumerate() {
        let mut acc = 0.0;
        for (t, w) in rule.nodes().iter().zip(rule.weights()) {
            let mut s = 0.0;
            for (k, ak) in levels.iter().enumerate() {
                if k != j {
                    let d = sg * (aj - ak);
                    s += (-d * (2.0 * t + d)).exp();
                }
            }
            acc += w * s.ln_1p();
        }
        total += acc;
    }
    total / (levels.len() as f64 * PI.sqrt() * LN_2)
}

// Per-dimension E[(a − E[a|y])²].
fn pam_mmse(levels: &[f64], rule: &QuadratureRule, gamma: f64) -> f64 {
    let sg = gamma.sqrt();
    let mut total = 0.0;
    for aj in levels {
        for (t, w) in rule.nodes().iter().zip(rule.weights()) {
            let mut num = 0.0;
            let mut den = 0.0;
            for ak in levels {
                let d = sg * (aj - ak);
                let p = (-d * (2.0 * t + d)).exp();
                num += p * ak;
                den += p;
            }
            let err = aj - num / den;
            total += w * err * err;
        }
    }
    total / (levels.len() as f64 * PI.sqrt())
}

/// I_M(γ) in bits with the default quadrature.
pub fn mi_exact(gamma: f64, constellation: &QamConstellation) -> f64 {
    constellation.mi(gamma)
}

/// S_M(γ) = dI_M/dγ in bits.
pub fn mi_derivative(gamma: f64, constellation: &QamConstellation) -> f64 {
    constellation.mi_slope(gamma)
}

pub fn mi_inverse(target_bits: f64, constellation: &QamConstellation) -> Result<f64> {
    constellation.mi_inverse(target_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn qam(m: usize) -> QamConstellation {
        QamConstellation::new(m).unwrap()
    }

    #[test]
    fn unit_power_and_gray() {
        for m in [4, 16, 64, 256] {
            let c = qam(m);
            let p: f64 = c.points().iter().map(|s| s.norm_sqr()).sum::<f64>() / m as f64;
            assert_relative_eq!(p, 1.0, max_relative = 1e-12);
            // Gray: labels differing in one bit are nearest neighbours along one axis.
            let dmin = 2.0 * c.pam_levels()[1] - 2.0 * c.pam_levels()[0];
            let dmin = dmin / 2.0;
            for a in 0..m {
                let side = (m as f64).sqrt() as usize;
                for b in [a ^ 1, a ^ side] {
                    if b < m {
                        assert_relative_eq!((c.points()[a] - c.points()[b]).norm(), dmin, max_relative = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn reference_values() {
        // Independent scipy quadrature of the same integral.
        let cases = [
            (4, 1e-3, 0.001_441_974_173_666_6),
            (4, 0.1, 0.137_486_626_889_90),
            (4, 1.0, 0.971_888_308_265_87),
            (4, 3.0, 1.690_663_590_242_73),
            (4, 10.0, 1.993_512_655_980_06),
            (16, 1.0, 0.989_741_372_130_25),
            (16, 10.0, 3.163_943_188_050_69),
            (64, 10.0, 3.268_572_356_453_99),
            (64, 100.0, 5.801_461_797_039_37),
        ];
        for (m, g, want) in cases {
            assert!((qam(m).mi(g) - want).abs() < 1e-6, "M={m} γ={g}: {} vs {want}", qam(m).mi(g));
        }
    }

    #[test]
    fn limits() {
        assert_eq!(qam(4).mi(0.0), 0.0);
        assert!((qam(4).mi(1e4) - 2.0).abs() < 1e-6);
        assert_relative_eq!(qam(4).mi_slope(0.0), 1.0 / LN_2, max_relative = 1e-2);
    }

    #[test]
    fn product_structure_matches_tensor() {
        let c = QamConstellation::with_hermite_order(16, 40).unwrap();
        for g in [0.05, 1.0, 7.0, 30.0] {
            assert!((c.mi(g) - c.mi_tensor(g)).abs() < 1e-9, "γ={g}");
        }
    }

    #[test]
    fn slope_matches_mmse_identity() {
        // Both sides share the Hermite rule; at high SNR the softplus integrand
        // needs more nodes before the two agree.
        for (order, cases) in [
            (64, vec![(4, 0.01), (4, 0.5), (4, 2.0), (16, 2.0), (64, 2.0), (64, 10.0)]),
            (300, vec![(4, 10.0), (16, 10.0), (16, 40.0), (64, 40.0)]),
        ] {
            for (m, g) in cases {
                let c = QamConstellation::with_hermite_order(m, order).unwrap();
                let mmse_bits = c.mmse(g) / LN_2;
                let rel = (c.mi_slope(g) - mmse_bits).abs() / mmse_bits;
                assert!(rel <= 1e-5, "M={m} γ={g} order {order}: {rel:e}");
            }
        }
    }

    #[test]
    fn slope_tail_bound() {
        let c = qam(4);
        for g in [20.0, 40.0, 60.0] {
            assert!(c.mi_slope(g) < (-0.5 * g).exp());
        }
    }

    #[test]
    fn slope_integrates_to_log2m() {
        let c = qam(4);
        let v =
            crate::numerics::integrate_semi_infinite(|g| c.mi_slope(g), &[0.1, 1.0, 10.0, 50.0], Default::default())
                .unwrap();
        assert!((v.value - 2.0).abs() < 1e-3);
    }

    #[test]
    fn inverse_round_trip_and_range() {
        let c = qam(4);
        assert_eq!(c.mi_inverse(0.0).unwrap(), 0.0);
        for g in [0.1, 1.0, 10.0] {
            assert_relative_eq!(c.mi_inverse(c.mi(g)).unwrap(), g, max_relative = 1e-6);
        }
        assert!(matches!(c.mi_inverse(2.0), Err(Error::MiRange { .. })));
        let target = 1.7;
        assert!((c.mi(c.mi_inverse(target).unwrap()) - target).abs() <= 1e-8);
    }

    #[test]
    fn low_snr_universality() {
        let r = qam(4).mi(1e-3) / qam(64).mi(1e-3);
        assert!((r - 1.0).abs() < 0.02);
    }

    #[test]
    fn invalid_order() {
        assert!(QamConstellation::new(8).is_err());
        assert!(QamConstellation::new(32).is_err());
    }

    proptest! {
        #[test]
        fn bounded_by_capacity(g in 0.0f64..1e4, idx in 0usize..4) {
            let c = qam([4, 16, 64, 256][idx]);
            let i = c.mi(g);
            prop_assert!(i >= 0.0);
            prop_assert!(i <= c.log2_m().min((1.0 + g).log2()) + 1e-12);
        }

        #[test]
        fn increasing_and_concave(g in 0.01f64..200.0, idx in 0usize..3) {
            let c = qam([4, 16, 64][idx]);
            let h = 0.01 * g;
            let (a, b, d) = (c.mi(g - h), c.mi(g), c.mi(g + h));
            prop_assume!(c.gap(g + h) > 1e-9);
            prop_assert!(d > b && b > a);
            prop_assert!(a + d - 2.0 * b < 1e-12);
        }
    }
}
