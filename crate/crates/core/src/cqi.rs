//! CQI measurement chain: ESM error, uniform quantization, reporting delay
//! and reconstruction at the AP.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the quantization-error variance handed to the filter is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantVarianceRule {
    /// `Δ² / (12·L)`.
    Table,
    /// `(Δ/L)² / 12`, the variance of the implemented step.
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CqiConfig {
    pub n_levels: usize,
    /// Width of the quantizer range, dB.
    pub sinr_span_db: f64,
    /// Lower edge of the quantizer range. Calibrated per drop when unset.
    pub sinr_min_db: Option<f64>,
    /// Length of the per-drop calibration pass, TTIs.
    pub calibration_ttis: usize,
    /// SINR quantile the range is anchored to during calibration.
    pub calibration_quantile: f64,
    /// ESM error standard deviation, dB. Defaults to `sqrt(Δ²/(12·L))`.
    pub esm_error_std: Option<f64>,
    pub report_delay: usize,
    pub quant_variance_rule: QuantVarianceRule,
}

impl Default for CqiConfig {
    fn default() -> Self {
        Self {
            n_levels: 29,
            sinr_span_db: 4.8,
            sinr_min_db: None,
            calibration_ttis: 10_000,
            calibration_quantile: 0.01,
            esm_error_std: None,
            report_delay: 1,
            quant_variance_rule: QuantVarianceRule::Table,
        }
    }
}

impl CqiConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("cqi: {m}")));
        if self.n_levels < 2 {
            return bad("n_levels must be at least 2");
        }
        if !(self.sinr_span_db > 0.0 && self.sinr_span_db.is_finite()) {
            return bad("sinr_span_db must be positive");
        }
        if self.report_delay < 1 {
            return bad("report_delay must be at least 1");
        }
        if matches!(self.sinr_min_db, Some(x) if !x.is_finite()) {
            return bad("sinr_min_db must be finite");
        }
        if matches!(self.esm_error_std, Some(s) if !(s >= 0.0)) {
            return bad("esm_error_std must be non-negative");
        }
        if self.sinr_min_db.is_none() && self.calibration_ttis == 0 {
            return bad("calibration_ttis must be positive when sinr_min_db is unset");
        }
        if !(self.calibration_quantile > 0.0 && self.calibration_quantile < 1.0) {
            return bad("calibration_quantile must be in (0, 1)");
        }
        Ok(())
    }

    pub fn step_db(&self) -> f64 {
        self.sinr_span_db / self.n_levels as f64
    }

    /// `Δ² / (12·L)`.
    pub fn table_quant_variance(&self) -> f64 {
        self.sinr_span_db * self.sinr_span_db / (12.0 * self.n_levels as f64)
    }

    /// `step² / 12`.
    pub fn step_quant_variance(&self) -> f64 {
        self.step_db() * self.step_db() / 12.0
    }

    pub fn quant_variance(&self) -> f64 {
        match self.quant_variance_rule {
            QuantVarianceRule::Table => self.table_quant_variance(),
            QuantVarianceRule::Step => self.step_quant_variance(),
        }
    }

    pub fn esm_std(&self) -> f64 {
        self.esm_error_std
            .unwrap_or_else(|| self.table_quant_variance().sqrt())
    }
}

/// Uniform quantizer over `[min_db, min_db + span_db]` with mid-rise
/// reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    pub min_db: f64,
    pub span_db: f64,
    pub levels: usize,
}

impl Quantizer {
    pub fn new(cfg: &CqiConfig, min_db: f64) -> Self {
        Self {
            min_db,
            span_db: cfg.sinr_span_db,
            levels: cfg.n_levels,
        }
    }

    pub fn step(&self) -> f64 {
        self.span_db / self.levels as f64
    }

    /// Saturating quantization of an eSNR in dB to a CQI index.
    pub fn quantize(&self, esnr_db: f64) -> usize {
        let pos = ((esnr_db - self.min_db) / self.step()).floor();
        if pos.is_nan() || pos <= 0.0 {
            0
        } else {
            (pos as usize).min(self.levels - 1)
        }
    }

    pub fn dequantize(&self, index: usize) -> Result<f64> {
        if index >= self.levels {
            return Err(Error::IndexOutOfRange {
                index,
                levels: self.levels,
            });
        }
        Ok(self.min_db + (index as f64 + 0.5) * self.step())
    }
}

/// Single-sub-band ESM: identity plus Gaussian error in dB.
pub fn esm_compress<R: Rng + ?Sized>(sinr_db: f64, error_std: f64, rng: &mut R) -> f64 {
    let w: f64 = rng.sample(StandardNormal);
    sinr_db + error_std * w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CqiReport {
    pub index: usize,
    pub tti_measured: usize,
    pub tti_delivered: usize,
}

impl CqiReport {
    pub fn new(index: usize, tti_measured: usize, delay: usize) -> Self {
        Self {
            index,
            tti_measured,
            tti_delivered: tti_measured + delay,
        }
    }
}

/// In-flight reports of one device, ordered by measurement time.
#[derive(Debug, Clone, Default)]
pub struct ReportQueue {
    pending: VecDeque<CqiReport>,
}

impl ReportQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, report: CqiReport) {
        debug_assert!(self
            .pending
            .back()
            .is_none_or(|last| last.tti_measured < report.tti_measured));
        self.pending.push_back(report);
    }

    /// Pops the report due at `now`, discarding any that were never collected.
    pub fn deliver(&mut self, now: usize) -> Option<CqiReport> {
        while let Some(front) = self.pending.front() {
            if front.tti_delivered < now {
                self.pending.pop_front();
            } else if front.tti_delivered == now {
                return self.pending.pop_front();
            } else {
                break;
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}
