//! Monte Carlo wiretap simulator used as an independent oracle.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ftr::FtrSampler;
use crate::qam::QamConstellation;
use crate::secrecy::Wiretap;

pub const MIN_SAMPLES: u64 = 1000;
/// Draws per RNG stream; block b uses stream b of the master seed.
pub const BLOCK_SIZE: u64 = 1 << 16;
pub const TABLE_KNOTS: usize = 4096;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSecrecy {
    pub asr: McEstimate,
    pub sop: Option<McEstimate>,
    pub p_pos: McEstimate,
    pub gaussian_asr: McEstimate,
}

// (M, Hermite order).
type TableKey = (usize, usize);

/// Monotone cubic (PCHIP) table of I_M over log-spaced SNR knots.
#[derive(Debug, Clone)]
pub struct MiTable {
    ln_knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    log2_m: f64,
}

impl MiTable {
    const GAMMA_MIN: f64 = 1e-6;

    pub fn new(qam: &QamConstellation) -> Self {
        let log2_m = qam.log2_m();
        // Past this SNR the gap is below 1e-13 bits.
        let gamma_max = 32.0 / qam.min_distance_rate() + 50.0;
        let (lo, hi) = (Self::GAMMA_MIN.ln(), gamma_max.ln());
        let step = (hi - lo) / (TABLE_KNOTS - 1) as f64;
        let ln_knots: Vec<f64> = (0..TABLE_KNOTS).map(|i| lo + step * i as f64).collect();
        let values: Vec<f64> = ln_knots.par_iter().map(|x| qam.mi(x.exp())).collect();
        let slopes = pchip_slopes(&ln_knots, &values);
        Self { ln_knots, values, slopes, log2_m }
    }

    /// Shared table per (M, Hermite order).
    pub fn cached(qam: &QamConstellation) -> Arc<MiTable> {
        static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<MiTable>>>> = OnceLock::new();
        let key = (qam.m_order(), qam.hermite_order());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("table cache poisoned").get(&key) {
            return t.clone();
        }
        let table = Arc::new(MiTable::new(qam));
        cache.lock().expect("table cache poisoned").entry(key).or_insert(table).clone()
    }

    pub fn mi(&self, gamma: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        if gamma < Self::GAMMA_MIN {
            // I_M is linear near the origin.
            return self.values[0] * gamma / Self::GAMMA_MIN;
        }
        let x = gamma.ln();
        let n = self.ln_knots.len();
        if x >= self.ln_knots[n - 1] {
            return self.log2_m;
        }
        let step = self.ln_knots[1] - self.ln_knots[0];
        let i = (((x - self.ln_knots[0]) / step) as usize).min(n - 2);
        let h = self.ln_knots[i + 1] - self.ln_knots[i];
        let t = (x - self.ln_knots[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1];
        v.clamp(0.0, self.log2_m)
    }
}

// Fritsch–Carlson derivatives; zero at local extrema keeps the interpolant monotone.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

// Count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments { n, mean: self.mean + d * other.n / n, m2: self.m2 + other.m2 + d * d * self.n * other.n / n }
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate { mean: self.mean, std_error: (var / self.n).sqrt(), n_samples: self.n as u64, seed }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockStats {
    asr: Moments,
    sop: Moments,
    p_pos: Moments,
    gaussian: Moments,
}

impl BlockStats {
    fn merge(self, o: BlockStats) -> BlockStats {
        BlockStats {
            asr: self.asr.merge(o.asr),
            sop: self.sop.merge(o.sop),
            p_pos: self.p_pos.merge(o.p_pos),
            gaussian: self.gaussian.merge(o.gaussian),
        }
    }
}

/// RNG for one block: the master seed selects the key, the block index the stream.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Independent (γ_B, γ_E) draws giving ASR, SOP and Pr(γ_B > γ_E) estimates.
///
/// Results depend only on (seed, n_samples), not on the thread count.
pub fn mc_secrecy(w: &Wiretap, rate_bits: Option<f64>, n_samples: u64, seed: u64) -> Result<McSecrecy> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!("at least {MIN_SAMPLES} samples required, got {n_samples}")));
    }
    if let Some(r) = rate_bits {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate threshold must be positive, got {r}")));
        }
    }
    let bob = FtrSampler::new(w.bob().params(), w.bob().avg_snr())?;
    let eve = FtrSampler::new(w.eve().params(), w.eve().avg_snr())?;
    let table = MiTable::cached(w.qam());
    let blocks = n_samples.div_ceil(BLOCK_SIZE);
    let per_block: Vec<BlockStats> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let count = BLOCK_SIZE.min(n_samples - b * BLOCK_SIZE);
            let mut st = BlockStats::default();
            for _ in 0..count {
                let gb = bob.sample(&mut rng);
                let ge = eve.sample(&mut rng);
                let rate = if gb > ge { (table.mi(gb) - table.mi(ge)).max(0.0) } else { 0.0 };
                st.asr.push(rate);
                if let Some(r) = rate_bits {
                    st.sop.push(if rate < r { 1.0 } else { 0.0 });
                }
                st.p_pos.push(if gb > ge { 1.0 } else { 0.0 });
                st.gaussian.push(((gb.ln_1p() - ge.ln_1p()) / std::f64::consts::LN_2).max(0.0));
            }
            st
        })
        .collect();
    let total = per_block.into_iter().fold(BlockStats::default(), BlockStats::merge);
    Ok(McSecrecy {
        asr: total.asr.estimate(seed),
        sop: rate_bits.map(|_| total.sop.estimate(seed)),
        p_pos: total.p_pos.estimate(seed),
        gaussian_asr: total.gaussian.estimate(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftr::{FtrParams, FtrSeriesConfig};
    use crate::numerics::special::exp_integral_e1;
    use rand::Rng;

    fn rayleigh_wiretap(snr_b: f64, snr_e: f64) -> Wiretap {
        let r = FtrParams::rayleigh();
        Wiretap::from_snrs((r, snr_b), (r, snr_e), 4, &FtrSeriesConfig::adaptive()).unwrap()
    }

    #[test]
    fn table_tracks_exact_mi() {
        for m in [4, 64] {
            let qam = QamConstellation::new(m).unwrap();
            let table = MiTable::new(&qam);
            let mut worst: f64 = 0.0;
            for i in 0..3000 {
                let g = 10f64.powf(-7.0 + 11.0 * (i as f64 + 0.37) / 3000.0);
                worst = worst.max((table.mi(g) - qam.mi(g)).abs());
            }
            assert!(worst < 1e-5, "M={m}: {worst:e}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let w = rayleigh_wiretap(10.0, 2.0);
        let a = mc_secrecy(&w, Some(0.5), 200_000, 7).unwrap();
        let b = mc_secrecy(&w, Some(0.5), 200_000, 7).unwrap();
        assert_eq!(a, b);
        let c = mc_secrecy(&w, Some(0.5), 200_000, 8).unwrap();
        assert_ne!(a.asr.mean, c.asr.mean);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let w = rayleigh_wiretap(10.0, 2.0);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| mc_secrecy(&w, None, 300_000, 3).unwrap());
        assert_eq!(serial, mc_secrecy(&w, None, 300_000, 3).unwrap());
    }

    #[test]
    fn std_error_halves_at_four_times_n() {
        let w = rayleigh_wiretap(10.0, 2.0);
        let small = mc_secrecy(&w, None, 50_000, 1).unwrap().asr.std_error;
        let large = mc_secrecy(&w, None, 200_000, 1).unwrap().asr.std_error;
        assert!((large / small - 0.5).abs() < 0.1);
    }

    #[test]
    fn rayleigh_gaussian_rate_matches_closed_form() {
        // E[(log₂(1+γ_B) − log₂(1+γ_E))⁺] for exponential SNRs.
        let (b, e) = (10.0, 2.0);
        let mean_log = |s: f64| (1.0 / s).exp() * exp_integral_e1(1.0 / s).unwrap();
        let c = b * e / (b + e);
        let exact = (mean_log(b) - mean_log(c)) / std::f64::consts::LN_2;
        let est = mc_secrecy(&rayleigh_wiretap(b, e), None, 1_000_000, 42).unwrap().gaussian_asr;
        assert!((est.mean - exact).abs() < 3.0 * est.std_error, "{} vs {exact}", est.mean);
    }

    #[test]
    fn streams_are_uncorrelated() {
        let n = 100_000;
        let mut r0 = block_rng(11, 0);
        let mut r1 = block_rng(11, 1);
        let xs: Vec<f64> = (0..n).map(|_| r0.random()).collect();
        let ys: Vec<f64> = (0..n).map(|_| r1.random()).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!((cov / (vx * vy).sqrt()).abs() < 0.01);
    }

    #[test]
    fn rejects_tiny_runs() {
        assert!(mc_secrecy(&rayleigh_wiretap(1.0, 1.0), None, 10, 0).is_err());
    }
}
