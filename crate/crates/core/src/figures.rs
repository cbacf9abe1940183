//! Built-in sweeps behind each figure.

use std::fmt;
use std::str::FromStr;

use crate::config::{ArraySpec, LinkSpec, McSpec, NodeSpec, NumericsSpec, RunConfig};
use crate::sweep::{Metric, Spacing, SweepSpec, SweepValues, SweepVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
}

const IDS: [(FigureId, &str); 8] = [
    (FigureId::Fig2a, "2a"),
    (FigureId::Fig2b, "2b"),
    (FigureId::Fig3a, "3a"),
    (FigureId::Fig3b, "3b"),
    (FigureId::Fig4a, "4a"),
    (FigureId::Fig4b, "4b"),
    (FigureId::Fig5a, "5a"),
    (FigureId::Fig5b, "5b"),
];

impl FigureId {
    pub fn all() -> impl Iterator<Item = FigureId> {
        IDS.iter().map(|(f, _)| *f)
    }

    pub fn label(self) -> &'static str {
        IDS.iter().find(|(f, _)| *f == self).map(|(_, l)| *l).expect("every figure is labelled")
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key = s.trim_start_matches("fig");
        IDS.iter()
            .find(|(_, l)| *l == key)
            .map(|(f, _)| *f)
            .ok_or_else(|| format!("unknown figure {s:?}; expected one of 2a, 2b, 3a, 3b, 4a, 4b, 5a, 5b"))
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fig{}", self.label())
    }
}

/// One CSV worth of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRun {
    pub stem: String,
    pub config: RunConfig,
}

fn node(r_km: f64, m: u32, k: f64, delta: f64) -> NodeSpec {
    NodeSpec { r_km, theta_deg: 20.0, m, k, delta }
}

fn scenario(bob: NodeSpec, eve: NodeSpec, n: usize, delta_f_khz: f64, p_dbw: f64, m_order: usize) -> RunConfig {
    RunConfig {
        array: ArraySpec { n, f0_ghz: 28.0, delta_f_khz },
        bob,
        eve,
        link: LinkSpec { p_dbw, noise_dbm: -140.0, noise_dbm_bob: None, noise_dbm_eve: None },
        m_order,
        numerics: NumericsSpec::default(),
        mc: McSpec::default(),
        sweep: None,
    }
}

/// ASR scenario: Bob (2, 10, 0.4), Eve (5, 5, 0.35), 10 dBW, N = 50, Δf = 1 kHz.
pub fn asr_scenario(m_order: usize) -> RunConfig {
    scenario(node(1.0, 2, 10.0, 0.4), node(1.5, 5, 5.0, 0.35), 50, 1.0, 10.0, m_order)
}

/// SOP scenario: Bob (1, 1, 1), Eve (1, 20, 1), 17 dBW, N = 50, Δf = 1 kHz.
pub fn sop_scenario(m_order: usize) -> RunConfig {
    scenario(node(1.0, 1, 1.0, 1.0), node(1.5, 1, 20.0, 1.0), 50, 1.0, 17.0, m_order)
}

/// Array-size scenario: Δ = 0.9, 15 dBW, Δf = 2 kHz, M = 4.
pub fn array_size_scenario(bob: (u32, f64), eve: (u32, f64)) -> RunConfig {
    scenario(node(1.0, bob.0, bob.1, 0.9), node(1.5, eve.0, eve.1, 0.9), 50, 2.0, 15.0, 4)
}

fn sweep(variable: SweepVariable, values: SweepValues, metrics: &[Metric], rate_bits: Option<f64>) -> SweepSpec {
    SweepSpec { variable, values, metrics: metrics.to_vec(), rate_bits }
}

fn linear(start: f64, stop: f64, count: usize) -> SweepValues {
    SweepValues::Range { start, stop, count, scale: Spacing::Linear }
}

/// Every CSV behind a figure, with the given numerics and Monte Carlo settings.
pub fn figure_runs(id: FigureId, numerics: &NumericsSpec, mc: McSpec) -> Vec<FigureRun> {
    use Metric::*;
    let r_b = || linear(0.2, 3.0, 15);
    let mut runs = Vec::new();
    let mut push = |stem: String, mut cfg: RunConfig, s: SweepSpec| {
        cfg.numerics = numerics.clone();
        cfg.mc = mc;
        cfg.sweep = Some(s);
        runs.push(FigureRun { stem, config: cfg });
    };
    match id {
        FigureId::Fig2a => {
            for m in [4, 16, 64] {
                let s = sweep(
                    SweepVariable::RangeBob,
                    r_b(),
                    &[AsrClosedForm, AsrQuadrature, AsrAsymptote, GaussianAsr, MonteCarlo],
                    None,
                );
                push(format!("fig2a_M{m}"), asr_scenario(m), s);
            }
        }
        FigureId::Fig2b => {
            for m in [4, 16, 64] {
                let s = sweep(SweepVariable::RangeBob, r_b(), &[AsrGap, AsrAsymptote], None);
                push(format!("fig2b_M{m}"), asr_scenario(m), s);
            }
        }
        FigureId::Fig3a | FigureId::Fig3b => {
            let (rate, orders, tag) =
                if id == FigureId::Fig3a { (1.8, vec![4, 16, 64], "3a") } else { (4.8, vec![64, 256], "3b") };
            for m in orders {
                let s = sweep(SweepVariable::RangeBob, r_b(), &[Sop, SopSeries, SopAsymptote, MonteCarlo], Some(rate));
                push(format!("fig{tag}_M{m}"), sop_scenario(m), s);
            }
        }
        FigureId::Fig4a => {
            for (tag, n, df) in [("fda", 150, 1.0), ("pa", 150, 0.0), ("single", 1, 0.0)] {
                let mut cfg = asr_scenario(4);
                cfg.array.n = n;
                cfg.array.delta_f_khz = df;
                cfg.eve.r_km = 2.5;
                let s = sweep(
                    SweepVariable::DeltaTheta,
                    linear(-10.0, 10.0, 41),
                    &[AsrClosedForm, AsrQuadrature, MonteCarlo],
                    None,
                );
                push(format!("fig4a_{tag}"), cfg, s);
            }
        }
        FigureId::Fig4b => {
            for df in [0.0, 1.0, 2.0, 5.0] {
                let mut cfg = asr_scenario(4);
                cfg.array.n = 100;
                cfg.array.delta_f_khz = df;
                let s = sweep(
                    SweepVariable::RangeEve,
                    linear(1.1, 5.0, 40),
                    &[AsrClosedForm, AsrQuadrature, MonteCarlo],
                    None,
                );
                push(format!("fig4b_df{df}khz"), cfg, s);
            }
        }
        FigureId::Fig5a | FigureId::Fig5b => {
            let curves: [((u32, f64), (u32, f64)); 3] = if id == FigureId::Fig5a {
                [((5, 3.0), (5, 3.0)), ((5, 10.0), (5, 3.0)), ((5, 3.0), (5, 10.0))]
            } else {
                [((2, 3.0), (2, 3.0)), ((2, 3.0), (5, 3.0)), ((5, 3.0), (2, 3.0))]
            };
            for (bob, eve) in curves {
                let stem = format!("fig{}_mB{}_KB{}_mE{}_KE{}", id.label(), bob.0, bob.1, eve.0, eve.1);
                let s = sweep(
                    SweepVariable::NElements,
                    linear(50.0, 150.0, 11),
                    &[Sop, SopSeries, SopAsymptote, MonteCarlo],
                    Some(1.0),
                );
                push(stem, array_size_scenario(bob, eve), s);
            }
        }
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        for f in FigureId::all() {
            assert_eq!(f.label().parse::<FigureId>().unwrap(), f);
            assert_eq!(f.to_string().parse::<FigureId>().unwrap(), f);
        }
        assert!("6a".parse::<FigureId>().is_err());
    }

    #[test]
    fn more_elements_or_offset_never_lower_asr_in_main_lobe() {
        use crate::secrecy::asr_quadrature;
        // Eve 100 m behind Bob on the same bearing stays inside the range main lobe for N Δf ≤ 750 kHz.
        let asr = |n: usize, df: f64| {
            let mut cfg = asr_scenario(4);
            cfg.array.n = n;
            cfg.array.delta_f_khz = df;
            cfg.eve.r_km = 1.1;
            cfg.eve.theta_deg = cfg.bob.theta_deg;
            asr_quadrature(&cfg.scenario().unwrap().resolve().unwrap()).unwrap().value
        };
        for n in [50, 100, 150] {
            let by_offset: Vec<f64> = [0.0, 1.0, 2.0, 5.0].iter().map(|df| asr(n, *df)).collect();
            assert!(by_offset.windows(2).all(|p| p[1] >= p[0]), "N = {n}: {by_offset:?}");
        }
        let by_size: Vec<f64> = [50, 100, 150].iter().map(|n| asr(*n, 2.0)).collect();
        assert!(by_size.windows(2).all(|p| p[1] >= p[0]), "{by_size:?}");
    }

    #[test]
    fn every_run_validates() {
        for f in FigureId::all() {
            let runs = figure_runs(f, &NumericsSpec::default(), McSpec::default());
            assert!(!runs.is_empty());
            for r in runs {
                r.config.validate().unwrap_or_else(|e| panic!("{}: {e:?}", r.stem));
            }
        }
    }
}
