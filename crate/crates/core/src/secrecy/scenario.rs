use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fda::{avg_snr, ArrayConfig, NodeGeometry};
use crate::ftr::{FtrParams, FtrSeries, FtrSeriesConfig};
use crate::numerics::quadrature::{scale_breakpoints, DEFAULT_HERMITE_ORDER, DEFAULT_LEGENDRE_ORDER};
use crate::qam::QamConstellation;

/// Full wiretap scenario in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub array: ArrayConfig,
    pub bob_geom: NodeGeometry,
    pub eve_geom: NodeGeometry,
    pub bob_fading: FtrParams,
    pub eve_fading: FtrParams,
    pub tx_power_dbw: f64,
    pub noise_dbm_bob: f64,
    pub noise_dbm_eve: f64,
    pub m_order: usize,
    pub series: FtrSeriesConfig,
    pub quadrature_order_v: usize,
    pub hermite_order: usize,
}

impl ScenarioConfig {
    /// Scenario with default series, Legendre and Hermite settings.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        array: ArrayConfig,
        bob_geom: NodeGeometry,
        eve_geom: NodeGeometry,
        bob_fading: FtrParams,
        eve_fading: FtrParams,
        tx_power_dbw: f64,
        noise_dbm: f64,
        m_order: usize,
    ) -> Self {
        Self {
            array,
            bob_geom,
            eve_geom,
            bob_fading,
            eve_fading,
            tx_power_dbw,
            noise_dbm_bob: noise_dbm,
            noise_dbm_eve: noise_dbm,
            m_order,
            series: FtrSeriesConfig::default(),
            quadrature_order_v: DEFAULT_LEGENDRE_ORDER,
            hermite_order: DEFAULT_HERMITE_ORDER,
        }
    }

    pub fn bob_avg_snr(&self) -> f64 {
        avg_snr(&self.array, &self.bob_geom, &self.bob_geom, self.tx_power_dbw, self.noise_dbm_bob)
    }

    pub fn eve_avg_snr(&self) -> f64 {
        avg_snr(&self.array, &self.bob_geom, &self.eve_geom, self.tx_power_dbw, self.noise_dbm_eve)
    }

    /// Derive average SNRs and build the per-link fading series.
    pub fn resolve(&self) -> Result<Wiretap> {
        let bob = FtrLink::new(self.bob_fading, self.bob_avg_snr(), &self.series)?;
        if !bob.is_active() {
            return Err(Error::InvalidParameter("Bob's average SNR must be positive".into()));
        }
        let eve = FtrLink::new(self.eve_fading, self.eve_avg_snr(), &self.series)?;
        let qam = QamConstellation::with_hermite_order(self.m_order, self.hermite_order)?;
        Wiretap::new(bob, eve, qam, self.quadrature_order_v)
    }
}

/// One fading link at a given average SNR. Zero average SNR is a point mass at γ = 0.
#[derive(Debug, Clone)]
pub struct FtrLink {
    series: Arc<FtrSeries>,
    avg_snr: f64,
}

impl FtrLink {
    pub fn new(params: FtrParams, avg_snr: f64, cfg: &FtrSeriesConfig) -> Result<Self> {
        if !(avg_snr >= 0.0 && avg_snr.is_finite()) {
            return Err(Error::InvalidParameter(format!("average SNR must be finite and >= 0, got {avg_snr}")));
        }
        Ok(Self { series: FtrSeries::new(&params, cfg)?, avg_snr })
    }

    pub fn params(&self) -> &FtrParams {
        self.series.params()
    }

    pub fn series(&self) -> &FtrSeries {
        &self.series
    }

    pub fn avg_snr(&self) -> f64 {
        self.avg_snr
    }

    /// False for the point mass at zero.
    pub fn is_active(&self) -> bool {
        self.avg_snr > 0.0
    }

    /// Gamma scale u = γ̄/(1+K).
    pub fn scale(&self) -> f64 {
        self.avg_snr / (1.0 + self.params().k())
    }

    /// Continuous density; the point mass of an inactive link is not represented.
    pub fn pdf(&self, gamma: f64) -> f64 {
        if self.is_active() {
            self.series.pdf(gamma, self.avg_snr)
        } else {
            0.0
        }
    }

    pub fn cdf(&self, gamma: f64) -> f64 {
        if self.is_active() {
            self.series.cdf(gamma, self.avg_snr)
        } else if gamma >= 0.0 {
            1.0
        } else {
            0.0
        }
    }

    pub fn sf(&self, gamma: f64) -> f64 {
        if self.is_active() {
            self.series.sf(gamma, self.avg_snr)
        } else if gamma >= 0.0 {
            0.0
        } else {
            1.0
        }
    }
}

/// Resolved Bob/Eve links with the signalling constellation.
#[derive(Debug, Clone)]
pub struct Wiretap {
    bob: FtrLink,
    eve: FtrLink,
    qam: QamConstellation,
    quadrature_v: usize,
}

impl Wiretap {
    pub fn new(bob: FtrLink, eve: FtrLink, qam: QamConstellation, quadrature_v: usize) -> Result<Self> {
        if quadrature_v < 2 {
            return Err(Error::InvalidParameter(format!("Gauss-Legendre order V must be >= 2, got {quadrature_v}")));
        }
        if !bob.is_active() {
            return Err(Error::InvalidParameter("Bob's average SNR must be positive".into()));
        }
        Ok(Self { bob, eve, qam, quadrature_v })
    }

    /// Links specified directly by fading parameters and average SNRs.
    pub fn from_snrs(
        bob: (FtrParams, f64),
        eve: (FtrParams, f64),
        m_order: usize,
        series: &FtrSeriesConfig,
    ) -> Result<Self> {
        Self::new(
            FtrLink::new(bob.0, bob.1, series)?,
            FtrLink::new(eve.0, eve.1, series)?,
            QamConstellation::new(m_order)?,
            DEFAULT_LEGENDRE_ORDER,
        )
    }

    /// Same links with Bob's average SNR replaced.
    pub fn with_bob_snr(&self, avg_snr: f64) -> Result<Self> {
        let bob = FtrLink { series: self.bob.series.clone(), avg_snr };
        Self::new(bob, self.eve.clone(), self.qam.clone(), self.quadrature_v)
    }

    pub fn bob(&self) -> &FtrLink {
        &self.bob
    }

    pub fn eve(&self) -> &FtrLink {
        &self.eve
    }

    pub fn qam(&self) -> &QamConstellation {
        &self.qam
    }

    pub fn quadrature_v(&self) -> usize {
        self.quadrature_v
    }

    /// Breakpoints for semi-infinite integrals over either link's SNR.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let d = self.qam.min_distance_rate();
        scale_breakpoints(&[self.bob.avg_snr, self.eve.avg_snr, 1.0 / d])
    }
}
