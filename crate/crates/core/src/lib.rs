//! Interference prediction and link adaptation for mobile sub-networks.
//!
//! The crate simulates a set of short-range sub-networks sharing a small
//! number of sub-bands, synthesizes the correlated inter-subnetwork
//! interference each device sees, turns the resulting SINR into delayed and
//! quantized CQI reports, and predicts the interference power at the access
//! point from those reports alone with an extended Kalman filter. Predictions
//! drive MCS selection against a target block-error rate.
//!
//! Module map:
//!
//! * [`scenario`] deployment and random-direction mobility
//! * [`channel`] pathloss, shadowing, fading and LOS blending per link
//! * [`interference`] interference aggregation, noise floor and SINR
//! * [`cqi`] ESM error, quantization and report delay
//! * [`predictor`] EKF, moving-average and genie predictors
//! * [`link_adaptation`] MCS tables, selection and achieved BLER
//! * [`harness`] per-TTI pipeline, metrics, config and output files

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod channel;
pub mod cqi;
mod error;
pub mod harness;
pub mod interference;
pub mod link_adaptation;
pub mod predictor;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};

pub use channel::{ChannelConfig, LinkChannel};
pub use cqi::{CqiConfig, CqiReport};
pub use harness::{PredictorKind, RunConfig, Summary, TtiRecord};
pub use interference::{NoiseConfig, TrafficConfig};
pub use link_adaptation::{LaConfig, McsEntry, McsTable};
pub use predictor::{DssmConfig, EkfState};
pub use scenario::{ScenarioConfig, ScenarioState, SubnetPose};

/// Converts decibels to a linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
