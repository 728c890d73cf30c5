//! Per-TTI simulation pipeline, metrics and result files.
//!
//! Each drop deploys a fresh world, calibrates the CQI quantizer on an
//! independent realization, then for every TTI and device: moves the
//! sub-networks, steps every link channel, samples traffic, aggregates the
//! interference, forms the true SINR, produces the CQI report, lets each
//! enabled predictor estimate the interference, and scores the MCS chosen
//! from that estimate against the true SINR.

mod config;
mod metrics;
mod output;
mod run;
mod world;

use std::path::Path;

pub use config::{parse_config, RunConfig, RunSettings};
pub use metrics::{ecdf, quantile, rae, summarize, PredictorSummary, Summary, SweepRow, SWEEP_TARGETS};
pub use output::{
    format_summary, load_records, read_records, save_records, save_summary, write_ecdfs, write_records,
    CONFIG_FILE, ECDF_BLER_FILE, ECDF_RAE_FILE, RECORDS_FILE, SUMMARY_FILE,
};
pub use run::{calibrate_quantizer, run, run_drop, DropOutput, PredictionRecord, RunOutput, TtiRecord};
pub use world::{DeviceTruth, World};

pub use crate::predictor::PredictorKind;
use crate::{Error, Result};

/// Runs `cfg` and writes the records, summary, ECDFs and the effective
/// configuration into `dir`.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<(RunOutput, Summary)> {
    cfg.validate()?;
    let table = cfg.la.table()?;
    let out = run(cfg, &table)?;
    let mut summary = summarize(&out.records, &table, cfg.la.target_bler)?;
    if cfg.predictors().contains(&PredictorKind::Ekf) {
        summary.ekf_diagnostics = Some(out.ekf);
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    cfg.save(dir.join(CONFIG_FILE))?;
    save_records(&dir.join(RECORDS_FILE), &out.records, &cfg.predictors())?;
    save_summary(dir, &summary)?;
    Ok((out, summary))
}

/// Rebuilds the summary of a finished run directory from its records and
/// configuration.
pub fn summarize_dir(dir: &Path) -> Result<Summary> {
    let cfg = RunConfig::load(dir.join(CONFIG_FILE))?;
    let table = cfg.la.table()?;
    let records = load_records(&dir.join(RECORDS_FILE))?;
    summarize(&records, &table, cfg.la.target_bler)
}
