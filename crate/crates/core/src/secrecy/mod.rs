//! Average secrecy rate and secrecy outage probability of the FDA wiretap link.

mod asr;
mod scenario;
mod sop;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use asr::{
    asr_asymptote, asr_closed_form, asr_gap_to_limit, asr_quadrature, asr_quadrature_with, gaussian_asr,
    instantaneous_secrecy_rate, prob_positive_secrecy, AsrForm,
};
pub use scenario::{FtrLink, ScenarioConfig, Wiretap};
pub use sop::{
    sop, sop_asymptote, sop_asymptote_slope_rho, sop_series, sop_series_with, SeriesDenominator,
    SERIES_CONSISTENCY_LIMIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Asymptotic,
    MonteCarlo,
}

/// A computed metric with its provenance and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub meta: BTreeMap<String, f64>,
}

impl SecrecyResult {
    fn new(value: f64, method: Method, error_estimate: f64) -> Self {
        Self { value, method, error_estimate, meta: BTreeMap::new() }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.meta.insert(key.to_string(), value);
        self
    }
}

/// High-SNR behaviour of a metric: value ≈ limit ∓ slope_coeff/γ̄_B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteReport {
    pub limit_value: f64,
    pub slope_coeff: f64,
    /// F_B(γ) ≈ chi_b γ/γ̄_B near the origin.
    pub chi_b: f64,
}

#[cfg(test)]
mod properties {
    use super::*;
    use crate::ftr::{FtrParams, FtrSeriesConfig};
    use crate::sweep::mixture_for;
    use proptest::prelude::*;

    const FADING: [(u32, f64, f64); 6] =
        [(2, 10.0, 0.4), (5, 5.0, 0.35), (1, 1.0, 1.0), (1, 20.0, 1.0), (5, 3.0, 0.9), (2, 3.0, 0.9)];
    const ORDERS: [usize; 3] = [4, 16, 64];

    fn wiretap(bob: usize, snr_b: f64, eve: usize, snr_e: f64, m: usize) -> Wiretap {
        let p = |i: usize| FtrParams::new(FADING[i].0, FADING[i].1, FADING[i].2).unwrap();
        Wiretap::from_snrs((p(bob), snr_b), (p(eve), snr_e), m, &FtrSeriesConfig::adaptive()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn asr_bounded_and_falls_with_eve_snr(
            bob in 0..6usize, eve in 0..6usize, lb in -1.0..3.0f64, le in -1.0..2.0f64, mi in 0..3usize,
        ) {
            let m = ORDERS[mi];
            let w = wiretap(bob, 10f64.powf(lb), eve, 10f64.powf(le), m);
            let asr = asr_quadrature(&w).unwrap().value;
            prop_assert!((0.0..=(m as f64).log2()).contains(&asr));
            let stronger_eve = wiretap(bob, 10f64.powf(lb), eve, 2.0 * 10f64.powf(le), m);
            prop_assert!(asr_quadrature(&stronger_eve).unwrap().value <= asr + 1e-9);
        }

        #[test]
        fn sop_is_a_probability_and_grows_with_rate(
            bob in 0..6usize, eve in 0..6usize, lb in -1.0..3.0f64, le in -1.0..2.0f64, mi in 0..3usize,
            f1 in 0.02..0.98f64, f2 in 0.02..0.98f64,
        ) {
            let m = ORDERS[mi];
            let w = wiretap(bob, 10f64.powf(lb), eve, 10f64.powf(le), m);
            let bits = (m as f64).log2();
            let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
            let s_lo = sop(&w, lo * bits).unwrap().value;
            let s_hi = sop(&w, hi * bits).unwrap().value;
            prop_assert!((0.0..=1.0).contains(&s_lo) && (0.0..=1.0).contains(&s_hi));
            prop_assert!(s_lo <= s_hi + 1e-9, "{s_lo} > {s_hi}");
        }

        #[test]
        fn closed_form_within_bracket(
            bob in 0..6usize, eve in 0..6usize, lb in -1.0..3.0f64, le in -1.0..2.0f64, mi in 0..2usize,
        ) {
            let w = wiretap(bob, 10f64.powf(lb), eve, 10f64.powf(le), ORDERS[mi]);
            let closed = asr_closed_form(&w, &mixture_for(w.qam()).unwrap()).unwrap();
            let quad = asr_quadrature(&w).unwrap().value;
            prop_assert!((closed.value - quad).abs() <= closed.error_estimate + 1e-9);
        }
    }
}
