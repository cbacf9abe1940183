//! Parameter sweeps over a [`RunConfig`] producing one CSV table.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::montecarlo::mc_secrecy;
use crate::qam::{fit_exp_mixture_default, ExpMixture, QamConstellation};
use crate::secrecy::{
    asr_asymptote, asr_closed_form, asr_gap_to_limit, asr_quadrature, gaussian_asr, sop, sop_asymptote, sop_series,
    Wiretap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Bob's range in km.
    RangeBob,
    /// Eve's range in km.
    RangeEve,
    /// θ_E − θ_B in degrees.
    DeltaTheta,
    NElements,
    /// Frequency offset in Hz.
    OffsetHz,
    KBob,
    KEve,
    MEve,
    /// Secrecy rate threshold in bits.
    RateThreshold,
}

const VARIABLES: [(SweepVariable, &str); 9] = [
    (SweepVariable::RangeBob, "r_B"),
    (SweepVariable::RangeEve, "r_E"),
    (SweepVariable::DeltaTheta, "delta_theta"),
    (SweepVariable::NElements, "n_elements"),
    (SweepVariable::OffsetHz, "offset_hz"),
    (SweepVariable::KBob, "K_B"),
    (SweepVariable::KEve, "K_E"),
    (SweepVariable::MEve, "m_E"),
    (SweepVariable::RateThreshold, "R_s"),
];

impl SweepVariable {
    pub fn name(self) -> &'static str {
        VARIABLES.iter().find(|(v, _)| *v == self).map(|(_, n)| *n).expect("every variable is named")
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepVariable::NElements | SweepVariable::MEve)
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        VARIABLES.iter().find(|(_, n)| *n == s).map(|(v, _)| *v).ok_or_else(|| {
            let names: Vec<&str> = VARIABLES.iter().map(|(_, n)| *n).collect();
            format!("unknown sweep variable {s:?}; expected one of {}", names.join(", "))
        })
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize, scale: Spacing },
}

impl SweepValues {
    pub fn points(&self) -> Vec<f64> {
        match self {
            SweepValues::List(v) => v.clone(),
            SweepValues::Range { start, stop, count, scale } => {
                if *count == 1 {
                    return vec![*start];
                }
                let n = (*count - 1) as f64;
                (0..*count)
                    .map(|i| {
                        let (a, b) = ((n - i as f64) / n, i as f64 / n);
                        match scale {
                            Spacing::Linear => (start * (n - i as f64) + stop * i as f64) / n,
                            Spacing::Log => (a * start.ln() + b * stop.ln()).exp(),
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    AsrClosedForm,
    AsrQuadrature,
    AsrAsymptote,
    /// Shortfall of the ASR below its limit, with its 1/γ̄_B prediction.
    AsrGap,
    Sop,
    SopSeries,
    SopAsymptote,
    GaussianAsr,
    MonteCarlo,
}

const METRICS: [(Metric, &str); 9] = [
    (Metric::AsrClosedForm, "asr_cf"),
    (Metric::AsrQuadrature, "asr_quad"),
    (Metric::AsrAsymptote, "asr_asym"),
    (Metric::AsrGap, "asr_gap"),
    (Metric::Sop, "sop"),
    (Metric::SopSeries, "sop_series"),
    (Metric::SopAsymptote, "sop_asym"),
    (Metric::GaussianAsr, "gaussian_asr"),
    (Metric::MonteCarlo, "mc"),
];

impl Metric {
    pub fn name(self) -> &'static str {
        METRICS.iter().find(|(m, _)| *m == self).map(|(_, n)| *n).expect("every metric is named")
    }

    fn needs_rate(self) -> bool {
        matches!(self, Metric::Sop | Metric::SopSeries | Metric::SopAsymptote)
    }

    fn columns(self, with_rate: bool) -> Vec<&'static str> {
        match self {
            Metric::AsrClosedForm => vec!["asr_cf", "asr_cf_bracket"],
            Metric::AsrQuadrature => vec!["asr_quad"],
            Metric::AsrAsymptote => vec!["asr_asym", "asr_asym_limit", "asr_asym_psi"],
            Metric::AsrGap => vec!["asr_gap", "asr_gap_asym"],
            Metric::Sop => vec!["sop"],
            Metric::SopSeries => vec!["sop_series"],
            Metric::SopAsymptote => vec!["sop_asym", "sop_asym_limit", "sop_asym_phi"],
            Metric::GaussianAsr => vec!["gaussian_asr"],
            Metric::MonteCarlo if with_rate => vec![
                "mc_asr",
                "mc_asr_stderr",
                "mc_p_pos",
                "mc_p_pos_stderr",
                "mc_gaussian_asr",
                "mc_gaussian_asr_stderr",
                "mc_sop",
                "mc_sop_stderr",
            ],
            Metric::MonteCarlo => vec![
                "mc_asr",
                "mc_asr_stderr",
                "mc_p_pos",
                "mc_p_pos_stderr",
                "mc_gaussian_asr",
                "mc_gaussian_asr_stderr",
            ],
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        METRICS.iter().find(|(_, n)| *n == s).map(|(m, _)| *m).ok_or_else(|| {
            let names: Vec<&str> = METRICS.iter().map(|(_, n)| *n).collect();
            format!("unknown metric {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: SweepValues,
    pub metrics: Vec<Metric>,
    /// Rate threshold for the SOP metrics, unless R_s is the swept variable.
    pub rate_bits: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self, m_order: usize) -> Vec<String> {
        let mut errs = Vec::new();
        match &self.values {
            SweepValues::List(v) if v.is_empty() => errs.push("sweep.values: must not be empty".into()),
            SweepValues::Range { count: 0, .. } => errs.push("sweep.range.count: must be >= 1".into()),
            SweepValues::Range { start, stop, scale: Spacing::Log, .. } if !(*start > 0.0 && *stop > 0.0) => {
                errs.push("sweep.range: log spacing needs positive start and stop".into())
            }
            _ => {}
        }
        for (i, x) in self.values.points().iter().enumerate() {
            if !x.is_finite() {
                errs.push(format!("sweep value #{i}: must be finite"));
            } else if self.variable.is_integer() && (x.fract() != 0.0 || *x < 1.0) {
                errs.push(format!("sweep value #{i}: {} needs positive integers, got {x}", self.variable));
            } else if self.variable == SweepVariable::RateThreshold && *x <= 0.0 {
                errs.push(format!("sweep value #{i}: R_s must be positive, got {x}"));
            }
        }
        if self.metrics.is_empty() {
            errs.push("sweep.metrics: must not be empty".into());
        }
        if let Some(r) = self.rate_bits {
            if !(r > 0.0 && r.is_finite()) {
                errs.push(format!("sweep.R_s: must be positive, got {r}"));
            }
        }
        let has_rate = self.rate_bits.is_some() || self.variable == SweepVariable::RateThreshold;
        if !has_rate {
            for m in &self.metrics {
                if m.needs_rate() {
                    errs.push(format!("sweep.R_s: required by metric {}", m.name()));
                }
            }
        }
        let _ = m_order;
        errs
    }

    fn has_rate(&self) -> bool {
        self.rate_bits.is_some() || self.variable == SweepVariable::RateThreshold
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.variable.name().to_string(), "snr_b_db".into(), "snr_e_db".into()];
        for m in &self.metrics {
            h.extend(m.columns(self.has_rate()).iter().map(|c| c.to_string()));
        }
        h
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "variable": self.variable.name(),
            "metrics": self.metrics.iter().map(|m| m.name()).collect::<Vec<_>>(),
        });
        match &self.values {
            SweepValues::List(xs) => v["values"] = json!(xs),
            SweepValues::Range { start, stop, count, scale } => {
                v["range"] = json!({
                    "start": start,
                    "stop": stop,
                    "count": count,
                    "scale": match scale { Spacing::Linear => "linear", Spacing::Log => "log" },
                })
            }
        }
        if let Some(r) = self.rate_bits {
            v["R_s"] = json!(r);
        }
        v
    }
}

/// Sweep output; `None` cells are metrics that do not apply at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidParameter(format!("CSV output: {e}"));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.map(format_number).unwrap_or_default())).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("CSV output: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

// Shortest representation that reads back to the same double.
fn format_number(x: f64) -> String {
    format!("{x:e}")
}

/// Fitted mixture shared across sweeps, one per (M, Hermite order).
pub fn mixture_for(qam: &QamConstellation) -> Result<Arc<ExpMixture>> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<ExpMixture>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (qam.m_order(), qam.hermite_order());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("mixture cache poisoned").get(&key) {
        return Ok(m.clone());
    }
    let fitted = Arc::new(fit_exp_mixture_default(qam)?);
    Ok(cache.lock().expect("mixture cache poisoned").entry(key).or_insert(fitted).clone())
}

/// Copy of `cfg` with the sweep variable set to `x`, and the rate threshold in effect.
pub fn apply_variable(cfg: &RunConfig, spec: &SweepSpec, x: f64) -> (RunConfig, Option<f64>) {
    let mut c = cfg.clone();
    let mut rate = spec.rate_bits;
    match spec.variable {
        SweepVariable::RangeBob => c.bob.r_km = x,
        SweepVariable::RangeEve => c.eve.r_km = x,
        SweepVariable::DeltaTheta => c.eve.theta_deg = c.bob.theta_deg + x,
        SweepVariable::NElements => c.array.n = x as usize,
        SweepVariable::OffsetHz => c.array.delta_f_khz = x / 1e3,
        SweepVariable::KBob => c.bob.k = x,
        SweepVariable::KEve => c.eve.k = x,
        SweepVariable::MEve => c.eve.m = x as u32,
        SweepVariable::RateThreshold => rate = Some(x),
    }
    (c, rate)
}

fn not_applicable<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateEve) | Err(Error::MiRange { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn db(x: f64) -> Option<f64> {
    (x > 0.0).then(|| 10.0 * x.log10())
}

/// All metric columns at one sweep point.
pub fn evaluate_point(cfg: &RunConfig, spec: &SweepSpec, x: f64) -> Result<Vec<Option<f64>>> {
    let (point, rate) = apply_variable(cfg, spec, x);
    let w = point.scenario()?.resolve()?;
    let mut row = vec![Some(x), db(w.bob().avg_snr()), db(w.eve().avg_snr())];
    for m in &spec.metrics {
        evaluate_metric(&w, *m, rate, &point, &mut row)?;
    }
    Ok(row)
}

fn evaluate_metric(
    w: &Wiretap,
    m: Metric,
    rate: Option<f64>,
    cfg: &RunConfig,
    row: &mut Vec<Option<f64>>,
) -> Result<()> {
    let snr_b = w.bob().avg_snr();
    let rate_or = || rate.ok_or_else(|| Error::InvalidParameter(format!("metric {} needs R_s", m.name())));
    match m {
        Metric::AsrClosedForm => {
            let mix = mixture_for(w.qam())?;
            let r = not_applicable(asr_closed_form(w, &mix))?;
            row.push(r.as_ref().map(|r| r.value));
            row.push(r.map(|r| r.error_estimate));
        }
        Metric::AsrQuadrature => row.push(Some(asr_quadrature(w)?.value)),
        Metric::AsrAsymptote => {
            let rep = asr_asymptote(w)?;
            row.extend([Some(rep.limit_value - rep.slope_coeff / snr_b), Some(rep.limit_value), Some(rep.slope_coeff)]);
        }
        Metric::AsrGap => {
            let rep = asr_asymptote(w)?;
            row.extend([Some(asr_gap_to_limit(w)?.value), Some(rep.slope_coeff / snr_b)]);
        }
        Metric::Sop => row.push(Some(sop(w, rate_or()?)?.value)),
        Metric::SopSeries => row.push(not_applicable(sop_series(w, rate_or()?))?.map(|r| r.value)),
        Metric::SopAsymptote => match not_applicable(sop_asymptote(w, rate_or()?))? {
            Some(rep) => row.extend([
                Some((rep.limit_value + rep.slope_coeff / snr_b).min(1.0)),
                Some(rep.limit_value),
                Some(rep.slope_coeff),
            ]),
            None => row.extend([None, None, None]),
        },
        Metric::GaussianAsr => row.push(Some(gaussian_asr(w)?.value)),
        Metric::MonteCarlo => {
            let mc = mc_secrecy(w, rate, cfg.mc.samples, cfg.mc.seed)?;
            for e in [mc.asr, mc.p_pos, mc.gaussian_asr].into_iter().chain(mc.sop) {
                row.push(Some(e.mean));
                row.push(Some(e.std_error));
            }
        }
    }
    Ok(())
}

/// Evaluate every sweep point in parallel; rows come back in sweep order.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepTable> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::InvalidParameter("config has no sweep section".into()))?;
    let rows: Vec<Result<Vec<Option<f64>>>> =
        spec.values.points().par_iter().map(|x| evaluate_point(cfg, spec, *x)).collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { header: spec.header(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(metrics: &str, values: &str) -> RunConfig {
        let text = format!(
            r#"{{
            "array": {{"n": 50, "f0_ghz": 28, "delta_f_khz": 1}},
            "bob": {{"r_km": 1.0, "theta_deg": 20, "m": 1, "K": 1, "delta": 1}},
            "eve": {{"r_km": 1.5, "theta_deg": 20, "m": 1, "K": 20, "delta": 1}},
            "link": {{"p_dbw": -40, "noise_dbm": -140}},
            "modulation": {{"M": 16}},
            "sweep": {{"variable": "r_B", "values": {values}, "metrics": {metrics}, "R_s": 1.8}},
            "mc": {{"samples": 20000, "seed": 5}}
        }}"#
        );
        RunConfig::from_json_str(&text).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for (v, n) in VARIABLES {
            assert_eq!(n.parse::<SweepVariable>().unwrap(), v);
        }
        for (m, n) in METRICS {
            assert_eq!(n.parse::<Metric>().unwrap(), m);
        }
        assert!("r_b".parse::<SweepVariable>().is_err());
    }

    #[test]
    fn ranges() {
        let lin = SweepValues::Range { start: 1.0, stop: 3.0, count: 5, scale: Spacing::Linear }.points();
        assert_eq!(lin, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let log = SweepValues::Range { start: 1.0, stop: 100.0, count: 3, scale: Spacing::Log }.points();
        assert!((log[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn table_shape_and_invariants() {
        let cfg = config(r#"["asr_quad", "asr_cf", "sop", "sop_asym", "mc"]"#, "[0.5, 1.0, 2.0]");
        let t = run_sweep(&cfg).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.header.len(), t.rows[0].len());
        let csv = t.to_csv_string();
        assert_eq!(csv.lines().count(), 4);
        for row in t.rows.iter() {
            let get = |n: &str| row[t.header.iter().position(|h| h == n).unwrap()].unwrap();
            assert!(get("asr_quad") >= 0.0);
            assert!((0.0..=1.0).contains(&get("sop")));
            assert!((get("asr_cf") - get("asr_quad")).abs() <= get("asr_cf_bracket") + 1e-6);
        }
    }

    #[test]
    fn deterministic_csv() {
        let cfg = config(r#"["mc"]"#, "[1.0, 2.0]");
        assert_eq!(run_sweep(&cfg).unwrap().to_csv_string(), run_sweep(&cfg).unwrap().to_csv_string());
    }

    #[test]
    fn rate_required_for_sop() {
        let text = config(r#"["sop"]"#, "[1.0]").to_json_pretty().replace("\"R_s\": 1.8", "\"R_s\": null");
        assert!(RunConfig::from_json_str(&text).is_err());
    }
}
