//! Frequency diverse array geometry, MRT beampattern and link budget.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

// Gains below this are treated as an exact null.
const NULL_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    n_elements: usize,
    carrier_hz: f64,
    offset_hz: f64,
    spacing_m: f64,
}

impl ArrayConfig {
    /// Half-wavelength spacing at the carrier.
    pub fn new(n_elements: usize, carrier_hz: f64, offset_hz: f64) -> Result<Self> {
        Self::with_spacing(n_elements, carrier_hz, offset_hz, SPEED_OF_LIGHT / (2.0 * carrier_hz))
    }

    pub fn with_spacing(n_elements: usize, carrier_hz: f64, offset_hz: f64, spacing_m: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if n_elements < 1 {
            bad.push("array needs at least one element".to_string());
        }
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            bad.push(format!("carrier frequency must be positive, got {carrier_hz}"));
        }
        if !(offset_hz >= 0.0 && offset_hz.is_finite()) {
            bad.push(format!("frequency offset must be >= 0, got {offset_hz}"));
        }
        if !(spacing_m > 0.0 && spacing_m.is_finite()) {
            bad.push(format!("element spacing must be positive, got {spacing_m}"));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParameter(bad.join("; ")));
        }
        Ok(Self { n_elements, carrier_hz, offset_hz, spacing_m })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn offset_hz(&self) -> f64 {
        self.offset_hz
    }

    pub fn spacing_m(&self) -> f64 {
        self.spacing_m
    }

    pub fn is_phased_array(&self) -> bool {
        self.offset_hz == 0.0
    }

    // Phase progression per element, in cycles.
    fn progression(&self, geom: &NodeGeometry) -> f64 {
        (self.carrier_hz * self.spacing_m * geom.angle_rad.sin() - geom.range_m * self.offset_hz) / SPEED_OF_LIGHT
    }
}

/// Polar position of a receiver relative to the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeGeometry {
    range_m: f64,
    angle_rad: f64,
}

impl NodeGeometry {
    pub fn new(range_m: f64, angle_rad: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if !(range_m > 0.0 && range_m.is_finite()) {
            bad.push(format!("range must be positive, got {range_m} m"));
        }
        if !(angle_rad > -PI / 2.0 && angle_rad < PI / 2.0) {
            bad.push(format!("angle must lie in (-90, 90) degrees, got {} degrees", angle_rad.to_degrees()));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParameter(bad.join("; ")));
        }
        Ok(Self { range_m, angle_rad })
    }

    pub fn from_km_deg(range_km: f64, angle_deg: f64) -> Result<Self> {
        Self::new(range_km * 1e3, angle_deg.to_radians())
    }

    pub fn range_m(&self) -> f64 {
        self.range_m
    }

    pub fn angle_rad(&self) -> f64 {
        self.angle_rad
    }
}

/// Transmit power, receiver noise and the resulting average SNR of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_dbw: f64,
    pub noise_dbm: f64,
    pub avg_snr_linear: f64,
}

impl LinkBudget {
    pub fn new(cfg: &ArrayConfig, bob: &NodeGeometry, node: &NodeGeometry, tx_power_dbw: f64, noise_dbm: f64) -> Self {
        Self { tx_power_dbw, noise_dbm, avg_snr_linear: avg_snr(cfg, bob, node, tx_power_dbw, noise_dbm) }
    }

    pub fn avg_snr_db(&self) -> f64 {
        10.0 * self.avg_snr_linear.log10()
    }
}

/// Unit-norm transmit steering vector, element k = e^{i2πk w(r,θ)}/√N.
pub fn steering_vector(cfg: &ArrayConfig, geom: &NodeGeometry) -> Vec<Complex64> {
    let w = cfg.progression(geom);
    let scale = 1.0 / (cfg.n_elements as f64).sqrt();
    (0..cfg.n_elements).map(|k| Complex64::from_polar(scale, 2.0 * PI * k as f64 * w)).collect()
}

/// |v(probe)·v(bob)^†| for an MRT transmitter aimed at Bob.
pub fn beampattern_gain(cfg: &ArrayConfig, bob: &NodeGeometry, probe: &NodeGeometry) -> f64 {
    // φ = ½(sinθ_p − sinθ_B) − Δf Δr / c at half-wavelength spacing.
    let phi = cfg.progression(probe) - cfg.progression(bob);
    let frac = phi - phi.round();
    if frac == 0.0 {
        return 1.0;
    }
    let n = cfg.n_elements as f64;
    let den = n * (PI * frac).sin();
    if den.abs() < 1e-300 {
        return 1.0;
    }
    let g = ((n * PI * frac).sin() / den).abs().min(1.0);
    if g < NULL_GAIN {
        0.0
    } else {
        g
    }
}

/// Distance between neighbouring range nulls, c/(NΔf).
pub fn null_spacing(cfg: &ArrayConfig) -> Result<f64> {
    if cfg.is_phased_array() {
        return Err(Error::PhasedArray);
    }
    Ok(SPEED_OF_LIGHT / (cfg.n_elements as f64 * cfg.offset_hz))
}

/// Upper bound (1/N)/sin(π/N) on the side-lobe level.
pub fn sidelobe_bound(n_elements: usize) -> Result<f64> {
    if n_elements < 2 {
        return Err(Error::InvalidParameter(format!("side-lobe bound needs N >= 2, got {n_elements}")));
    }
    let n = n_elements as f64;
    Ok(1.0 / (n * (PI / n).sin()))
}

/// Free-space path loss 32.5 + 20 log10(f/MHz) + 20 log10(r/km), in dB.
pub fn path_loss_db(carrier_hz: f64, range_m: f64) -> f64 {
    32.5 + 20.0 * (carrier_hz / 1e6).log10() + 20.0 * (range_m / 1e3).log10()
}

/// Linear average SNR |Θ|² P/(σ² A) at `node` with the beam steered at `bob`.
pub fn avg_snr(cfg: &ArrayConfig, bob: &NodeGeometry, node: &NodeGeometry, p_dbw: f64, noise_dbm: f64) -> f64 {
    let gain = beampattern_gain(cfg, bob, node);
    if gain == 0.0 {
        return 0.0;
    }
    let noise_dbw = noise_dbm - 30.0;
    let snr_db = p_dbw - noise_dbw - path_loss_db(cfg.carrier_hz, node.range_m);
    gain * gain * 10f64.powf(snr_db / 10.0)
}
