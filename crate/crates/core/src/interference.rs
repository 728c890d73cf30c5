//! Interference aggregation, thermal noise and SINR.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{db_to_linear, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Probability that an AP transmits in a TTI.
    pub activity_prob: f64,
    /// Transmit power in dBW.
    pub tx_power_dbw: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            activity_prob: 0.5,
            tx_power_dbw: 0.0,
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.activity_prob) {
            return Err(Error::InvalidConfig("traffic: activity_prob must be in [0, 1]".into()));
        }
        if !self.tx_power_dbw.is_finite() {
            return Err(Error::InvalidConfig("traffic: tx_power_dbw must be finite".into()));
        }
        Ok(())
    }

    /// Transmit power in watts.
    pub fn tx_power(&self) -> f64 {
        db_to_linear(self.tx_power_dbw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub noise_figure_db: f64,
    /// Noise bandwidth in Hz.
    pub bandwidth: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            noise_figure_db: 10.0,
            bandwidth: 50e6,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidConfig("noise: bandwidth must be positive".into()));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(Error::InvalidConfig("noise: noise_figure_db must be finite".into()));
        }
        Ok(())
    }
}

/// Ground truth of one device in one TTI.
#[derive(Debug, Clone, PartialEq)]
pub struct TtiGroundTruth {
    pub ipv: f64,
    pub signal_power: f64,
    pub sinr: f64,
    pub active_mask: Vec<bool>,
}

/// Receiver noise power in watts: `-174 dBm/Hz + 10·log10(BW) + NF`.
pub fn thermal_noise_power(cfg: &NoiseConfig) -> f64 {
    let dbm = -174.0 + 10.0 * cfg.bandwidth.log10() + cfg.noise_figure_db;
    db_to_linear(dbm) * 1e-3
}

/// Independent ON/OFF draw for each of `count` transmitters.
pub fn sample_traffic<R: Rng + ?Sized>(count: usize, cfg: &TrafficConfig, rng: &mut R) -> Vec<bool> {
    (0..count).map(|_| rng.random_bool(cfg.activity_prob)).collect()
}

/// Sum of `P·gain` over the active interferers.
pub fn aggregate_interference(gains: &[f64], mask: &[bool], cfg: &TrafficConfig) -> f64 {
    debug_assert_eq!(gains.len(), mask.len());
    let p = cfg.tx_power();
    gains
        .iter()
        .zip(mask)
        .filter(|(_, &on)| on)
        .map(|(g, _)| p * g)
        .sum()
}

pub fn true_sinr(signal_power: f64, ipv: f64, noise: f64) -> f64 {
    signal_power / (ipv + noise)
}
