//! Run configuration in boundary units (km, degrees, GHz, kHz, dBW, dBm).

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::fda::{ArrayConfig, NodeGeometry};
use crate::ftr::{FtrParams, FtrSeriesConfig};
use crate::numerics::quadrature::{DEFAULT_HERMITE_ORDER, DEFAULT_LEGENDRE_ORDER};
use crate::qam::QamConstellation;
use crate::secrecy::ScenarioConfig;
use crate::sweep::{Metric, Spacing, SweepSpec, SweepValues, SweepVariable};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpec {
    pub n: usize,
    pub f0_ghz: f64,
    pub delta_f_khz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub r_km: f64,
    pub theta_deg: f64,
    pub m: u32,
    pub k: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub p_dbw: f64,
    pub noise_dbm: f64,
    pub noise_dbm_bob: Option<f64>,
    pub noise_dbm_eve: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Auto,
    Fixed(usize),
}

impl Truncation {
    pub fn series_config(self) -> FtrSeriesConfig {
        match self {
            Truncation::Auto => FtrSeriesConfig::adaptive(),
            Truncation::Fixed(j) => FtrSeriesConfig::fixed(j),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsSpec {
    pub truncation: Truncation,
    pub quadrature_v: usize,
    pub hermite_order: usize,
}

impl Default for NumericsSpec {
    fn default() -> Self {
        Self {
            truncation: Truncation::Auto,
            quadrature_v: DEFAULT_LEGENDRE_ORDER,
            hermite_order: DEFAULT_HERMITE_ORDER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED }
    }
}

/// Scenario plus optional sweep, Monte Carlo and numerics settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub array: ArraySpec,
    pub bob: NodeSpec,
    pub eve: NodeSpec,
    pub link: LinkSpec,
    pub m_order: usize,
    pub numerics: NumericsSpec,
    pub mc: McSpec,
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut errs = Vec::new();
        let cfg = parse_root(&value, &mut errs);
        match cfg {
            Some(cfg) if errs.is_empty() => {
                cfg.validate().map_err(ConfigError::Invalid)?;
                Ok(cfg)
            }
            _ => Err(ConfigError::Invalid(errs)),
        }
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json_str(&text)
    }

    /// Every semantic problem, one message per offending field.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if let Err(e) = self.array_config() {
            errs.push(format!("array: {e}"));
        }
        for (name, node) in [("bob", &self.bob), ("eve", &self.eve)] {
            if let Err(e) = NodeGeometry::from_km_deg(node.r_km, node.theta_deg) {
                errs.push(format!("{name}: {e}"));
            }
            if let Err(e) = FtrParams::new(node.m, node.k, node.delta) {
                errs.push(format!("{name}: {e}"));
            }
        }
        for (name, v) in [
            ("link.p_dbw", Some(self.link.p_dbw)),
            ("link.noise_dbm", Some(self.link.noise_dbm)),
            ("link.noise_dbm_bob", self.link.noise_dbm_bob),
            ("link.noise_dbm_eve", self.link.noise_dbm_eve),
        ] {
            if v.is_some_and(|x| !x.is_finite()) {
                errs.push(format!("{name}: must be finite"));
            }
        }
        if let Err(e) = QamConstellation::with_hermite_order(self.m_order, self.numerics.hermite_order) {
            errs.push(format!("modulation: {e}"));
        }
        if self.numerics.quadrature_v < 2 {
            errs.push(format!("numerics.quadrature_v: must be >= 2, got {}", self.numerics.quadrature_v));
        }
        if self.numerics.truncation == Truncation::Fixed(0) {
            errs.push("numerics.truncation: must be >= 1 or \"auto\"".into());
        }
        if self.mc.samples < crate::montecarlo::MIN_SAMPLES {
            errs.push(format!("mc.samples: must be >= {}, got {}", crate::montecarlo::MIN_SAMPLES, self.mc.samples));
        }
        if let Some(s) = &self.sweep {
            errs.extend(s.validate(self.m_order));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    fn array_config(&self) -> crate::Result<ArrayConfig> {
        ArrayConfig::new(self.array.n, self.array.f0_ghz * 1e9, self.array.delta_f_khz * 1e3)
    }

    /// Physical scenario in SI units.
    pub fn scenario(&self) -> crate::Result<ScenarioConfig> {
        let node = |n: &NodeSpec| -> crate::Result<(NodeGeometry, FtrParams)> {
            Ok((NodeGeometry::from_km_deg(n.r_km, n.theta_deg)?, FtrParams::new(n.m, n.k, n.delta)?))
        };
        let (bob_geom, bob_fading) = node(&self.bob)?;
        let (eve_geom, eve_fading) = node(&self.eve)?;
        Ok(ScenarioConfig {
            array: self.array_config()?,
            bob_geom,
            eve_geom,
            bob_fading,
            eve_fading,
            tx_power_dbw: self.link.p_dbw,
            noise_dbm_bob: self.link.noise_dbm_bob.unwrap_or(self.link.noise_dbm),
            noise_dbm_eve: self.link.noise_dbm_eve.unwrap_or(self.link.noise_dbm),
            m_order: self.m_order,
            series: self.numerics.truncation.series_config(),
            quadrature_order_v: self.numerics.quadrature_v,
            hermite_order: self.numerics.hermite_order,
        })
    }

    /// JSON in the same schema the parser reads.
    pub fn to_value(&self) -> Value {
        let node =
            |n: &NodeSpec| json!({"r_km": n.r_km, "theta_deg": n.theta_deg, "m": n.m, "K": n.k, "delta": n.delta});
        let mut link = json!({"p_dbw": self.link.p_dbw, "noise_dbm": self.link.noise_dbm});
        if let Some(v) = self.link.noise_dbm_bob {
            link["noise_dbm_bob"] = json!(v);
        }
        if let Some(v) = self.link.noise_dbm_eve {
            link["noise_dbm_eve"] = json!(v);
        }
        let truncation = match self.numerics.truncation {
            Truncation::Auto => json!("auto"),
            Truncation::Fixed(j) => json!(j),
        };
        let mut root = json!({
            "array": {"n": self.array.n, "f0_ghz": self.array.f0_ghz, "delta_f_khz": self.array.delta_f_khz},
            "bob": node(&self.bob),
            "eve": node(&self.eve),
            "link": link,
            "modulation": {"M": self.m_order},
            "numerics": {
                "truncation": truncation,
                "quadrature_v": self.numerics.quadrature_v,
                "hermite_order": self.numerics.hermite_order,
            },
            "mc": {"samples": self.mc.samples, "seed": self.mc.seed},
        });
        if let Some(s) = &self.sweep {
            root["sweep"] = s.to_value();
        }
        root
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("config serializes")
    }
}

// Typed access to one JSON object, recording missing, mistyped and unknown keys.
struct Section<'a> {
    path: String,
    obj: Option<&'a Map<String, Value>>,
    used: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn new(path: &str, v: Option<&'a Value>, required: bool, errs: &mut Vec<String>) -> Self {
        let obj = match v {
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                errs.push(format!("{path}: expected an object"));
                None
            }
            None => {
                if required {
                    errs.push(format!("{path}: missing section"));
                }
                None
            }
        };
        Self { path: path.to_string(), obj, used: Vec::new() }
    }

    fn present(&self) -> bool {
        self.obj.is_some()
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.obj.and_then(|o| o.get(key))
    }

    fn num_opt(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<f64> {
        match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(v) => match v.as_f64() {
                Some(x) => Some(x),
                None => {
                    errs.push(format!("{}.{key}: expected a number, got {v}", self.path));
                    None
                }
            },
        }
    }

    fn num(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<f64> {
        let present = self.obj.is_some_and(|o| o.get(key).is_some());
        let v = self.num_opt(key, errs);
        if !present && self.obj.is_some() {
            errs.push(format!("{}.{key}: missing field", self.path));
        }
        v
    }

    fn uint_opt(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<u64> {
        match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(v) => match v.as_u64() {
                Some(x) => Some(x),
                None => {
                    errs.push(format!("{}.{key}: expected a nonnegative integer, got {v}", self.path));
                    None
                }
            },
        }
    }

    fn uint(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<u64> {
        let present = self.obj.is_some_and(|o| o.get(key).is_some());
        let v = self.uint_opt(key, errs);
        if !present && self.obj.is_some() {
            errs.push(format!("{}.{key}: missing field", self.path));
        }
        v
    }

    fn finish(self, errs: &mut Vec<String>) {
        if let Some(o) = self.obj {
            for k in o.keys() {
                if !self.used.contains(&k.as_str()) {
                    errs.push(format!("{}.{k}: unknown field", self.path));
                }
            }
        }
    }
}

fn parse_node(path: &str, v: Option<&Value>, errs: &mut Vec<String>) -> Option<NodeSpec> {
    let mut s = Section::new(path, v, true, errs);
    let r_km = s.num("r_km", errs);
    let theta_deg = s.num("theta_deg", errs);
    let m = s.uint("m", errs);
    let k = s.num("K", errs);
    let delta = s.num("delta", errs);
    s.finish(errs);
    let m = match m.map(u32::try_from) {
        Some(Ok(m)) => Some(m),
        Some(Err(_)) => {
            errs.push(format!("{path}.m: too large"));
            None
        }
        None => None,
    };
    Some(NodeSpec { r_km: r_km?, theta_deg: theta_deg?, m: m?, k: k?, delta: delta? })
}

fn parse_root(root: &Value, errs: &mut Vec<String>) -> Option<RunConfig> {
    let Some(obj) = root.as_object() else {
        errs.push("config: top level must be an object".into());
        return None;
    };
    const SECTIONS: [&str; 9] = ["array", "bob", "eve", "link", "modulation", "numerics", "mc", "sweep", "$schema"];
    for k in obj.keys() {
        if !SECTIONS.contains(&k.as_str()) {
            errs.push(format!("{k}: unknown section"));
        }
    }

    let mut a = Section::new("array", obj.get("array"), true, errs);
    let n = a.uint("n", errs);
    let f0_ghz = a.num("f0_ghz", errs);
    let delta_f_khz = a.num("delta_f_khz", errs);
    a.finish(errs);

    let bob = parse_node("bob", obj.get("bob"), errs);
    let eve = parse_node("eve", obj.get("eve"), errs);

    let mut l = Section::new("link", obj.get("link"), true, errs);
    let p_dbw = l.num("p_dbw", errs);
    let noise_dbm = l.num("noise_dbm", errs);
    let noise_dbm_bob = l.num_opt("noise_dbm_bob", errs);
    let noise_dbm_eve = l.num_opt("noise_dbm_eve", errs);
    l.finish(errs);

    let mut md = Section::new("modulation", obj.get("modulation"), true, errs);
    let m_order = md.uint("M", errs);
    md.finish(errs);

    let mut nm = Section::new("numerics", obj.get("numerics"), false, errs);
    let mut numerics = NumericsSpec::default();
    match nm.raw("truncation") {
        None | Some(Value::Null) => {}
        Some(Value::String(s)) if s == "auto" => numerics.truncation = Truncation::Auto,
        Some(v) => match v.as_u64() {
            Some(j) => numerics.truncation = Truncation::Fixed(j as usize),
            None => errs.push(format!("numerics.truncation: expected \"auto\" or an integer, got {v}")),
        },
    }
    if let Some(v) = nm.uint_opt("quadrature_v", errs) {
        numerics.quadrature_v = v as usize;
    }
    if let Some(v) = nm.uint_opt("hermite_order", errs) {
        numerics.hermite_order = v as usize;
    }
    nm.finish(errs);

    let mut mcs = Section::new("mc", obj.get("mc"), false, errs);
    let mut mc = McSpec::default();
    if let Some(v) = mcs.uint_opt("samples", errs) {
        mc.samples = v;
    }
    if let Some(v) = mcs.uint_opt("seed", errs) {
        mc.seed = v;
    }
    mcs.finish(errs);

    let sweep = match obj.get("sweep") {
        None | Some(Value::Null) => None,
        Some(v) => parse_sweep(v, errs),
    };

    Some(RunConfig {
        array: ArraySpec { n: n? as usize, f0_ghz: f0_ghz?, delta_f_khz: delta_f_khz? },
        bob: bob?,
        eve: eve?,
        link: LinkSpec { p_dbw: p_dbw?, noise_dbm: noise_dbm?, noise_dbm_bob, noise_dbm_eve },
        m_order: m_order? as usize,
        numerics,
        mc,
        sweep: if obj.get("sweep").is_some_and(|v| !v.is_null()) { Some(sweep?) } else { None },
    })
}

fn parse_sweep(v: &Value, errs: &mut Vec<String>) -> Option<SweepSpec> {
    let mut s = Section::new("sweep", Some(v), true, errs);
    if !s.present() {
        return None;
    }
    let variable = match s.raw("variable") {
        Some(Value::String(name)) => match name.parse::<SweepVariable>() {
            Ok(v) => Some(v),
            Err(e) => {
                errs.push(format!("sweep.variable: {e}"));
                None
            }
        },
        Some(other) => {
            errs.push(format!("sweep.variable: expected a string, got {other}"));
            None
        }
        None => {
            errs.push("sweep.variable: missing field".into());
            None
        }
    };
    let list = s.raw("values");
    let range = s.raw("range");
    let values = match (list, range) {
        (Some(Value::Array(items)), None) => {
            let mut out = Vec::with_capacity(items.len());
            for (i, it) in items.iter().enumerate() {
                match it.as_f64() {
                    Some(x) => out.push(x),
                    None => errs.push(format!("sweep.values[{i}]: expected a number, got {it}")),
                }
            }
            Some(SweepValues::List(out))
        }
        (Some(other), None) => {
            errs.push(format!("sweep.values: expected an array, got {other}"));
            None
        }
        (None, Some(r)) => {
            let mut rs = Section::new("sweep.range", Some(r), true, errs);
            let start = rs.num("start", errs);
            let stop = rs.num("stop", errs);
            let count = rs.uint("count", errs);
            let scale = match rs.raw("scale") {
                None | Some(Value::Null) => Some(Spacing::Linear),
                Some(Value::String(x)) if x == "linear" => Some(Spacing::Linear),
                Some(Value::String(x)) if x == "log" => Some(Spacing::Log),
                Some(other) => {
                    errs.push(format!("sweep.range.scale: expected \"linear\" or \"log\", got {other}"));
                    None
                }
            };
            rs.finish(errs);
            Some(SweepValues::Range { start: start?, stop: stop?, count: count? as usize, scale: scale? })
        }
        (Some(_), Some(_)) => {
            errs.push("sweep: give either values or range, not both".into());
            None
        }
        (None, None) => {
            errs.push("sweep.values: missing field (or give sweep.range)".into());
            None
        }
    };
    let metrics = match s.raw("metrics") {
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for (i, it) in items.iter().enumerate() {
                match it.as_str().map(str::parse::<Metric>) {
                    Some(Ok(m)) => out.push(m),
                    Some(Err(e)) => errs.push(format!("sweep.metrics[{i}]: {e}")),
                    None => errs.push(format!("sweep.metrics[{i}]: expected a string, got {it}")),
                }
            }
            Some(out)
        }
        Some(other) => {
            errs.push(format!("sweep.metrics: expected an array, got {other}"));
            None
        }
        None => {
            errs.push("sweep.metrics: missing field".into());
            None
        }
    };
    let rate_bits = s.num_opt("R_s", errs);
    s.finish(errs);
    Some(SweepSpec { variable: variable?, values: values?, metrics: metrics?, rate_bits })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG2A: &str = r#"{
        "array": {"n": 50, "f0_ghz": 28, "delta_f_khz": 1},
        "bob": {"r_km": 1.0, "theta_deg": 20, "m": 2, "K": 10, "delta": 0.4},
        "eve": {"r_km": 1.5, "theta_deg": 20, "m": 5, "K": 5, "delta": 0.35},
        "link": {"p_dbw": 10, "noise_dbm": -140},
        "modulation": {"M": 4},
        "sweep": {"variable": "r_B", "values": [0.8, 1.0, 1.5], "metrics": ["asr_quad"]},
        "mc": {"samples": 100000, "seed": 7}
    }"#;

    #[test]
    fn parses_figure_scenario() {
        let cfg = RunConfig::from_json_str(FIG2A).unwrap();
        assert_eq!(cfg.array.n, 50);
        assert_eq!(cfg.mc.seed, 7);
        let scn = cfg.scenario().unwrap();
        assert_eq!(scn.array.carrier_hz(), 28e9);
        assert_eq!(scn.bob_fading, FtrParams::new(2, 10.0, 0.4).unwrap());
        assert_eq!(cfg.numerics.truncation, Truncation::Auto);
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = RunConfig::from_json_str("{\n \"array\": {\"n\": 50,,}\n}").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn validation_lists_every_problem() {
        let text = FIG2A
            .replace("\"K\": 10", "\"K\": -1")
            .replace("\"delta\": 0.35", "\"delta\": 1.5")
            .replace("\"M\": 4", "\"M\": 8");
        let ConfigError::Invalid(errs) = RunConfig::from_json_str(&text).unwrap_err() else { panic!() };
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs[0].starts_with("bob:") && errs[0].contains("K must be"));
        assert!(errs[1].starts_with("eve:") && errs[1].contains("delta"));
        assert!(errs[2].starts_with("modulation:"));
    }

    #[test]
    fn structural_errors_name_fields() {
        let text = FIG2A.replace("\"theta_deg\": 20, \"m\": 2", "\"theta\": 20, \"m\": \"two\"");
        let ConfigError::Invalid(errs) = RunConfig::from_json_str(&text).unwrap_err() else { panic!() };
        assert!(errs.iter().any(|e| e == "bob.theta_deg: missing field"), "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("bob.m: expected")));
        assert!(errs.iter().any(|e| e == "bob.theta: unknown field"));
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::from_json_str(FIG2A).unwrap();
        cfg.numerics.truncation = Truncation::Fixed(40);
        cfg.link.noise_dbm_eve = Some(-130.0);
        let again = RunConfig::from_json_str(&cfg.to_json_pretty()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.scenario().unwrap(), cfg.scenario().unwrap());
    }
}
