use serde::{Deserialize, Serialize};

use super::run::TtiRecord;
use crate::link_adaptation::McsTable;
use crate::predictor::{EkfDiagnostics, PredictorKind};
use crate::{linear_to_db, Error, Result};

/// Targets of the BLER sweep, one per decade.
pub const SWEEP_TARGETS: [f64; 5] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// Relative absolute error `|(I − Î)/I|`.
pub fn rae(true_ipv: f64, pred_ipv: f64) -> Result<f64> {
    if true_ipv == 0.0 {
        return Err(Error::DegenerateTruth);
    }
    Ok(((true_ipv - pred_ipv) / true_ipv).abs())
}

/// Empirical CDF: the sorted samples paired with `i/n`.
pub fn ecdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / n))
        .collect())
}

/// Lower empirical quantile: the smallest sample whose ECDF reaches `p`.
pub fn quantile(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub target_bler: f64,
    /// TTIs where the most robust MCS meets this target at the true SINR.
    pub feasible_ttis: usize,
    /// 95th percentile of achieved BLER over those TTIs.
    pub p95_achieved_bler: Option<f64>,
    pub fraction_meeting_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSummary {
    pub predictor: PredictorKind,
    pub median_rae: Option<f64>,
    pub median_rae_db: Option<f64>,
    /// Records left out of the RAE statistics because the true IPV was zero.
    pub rae_skipped: usize,
    pub feasible_ttis: usize,
    pub met_target: usize,
    /// Share of feasible TTIs whose achieved BLER met the target.
    pub fraction_meeting_target: Option<f64>,
    pub p95_achieved_bler: Option<f64>,
    pub sweep: Vec<SweepRow>,
    /// Median RAE per sub-network id.
    pub per_subnet_median_rae: Vec<Option<f64>>,
    #[serde(skip)]
    pub rae_ecdf: Vec<(f64, f64)>,
    #[serde(skip)]
    pub bler_ecdf: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub records: usize,
    pub target_bler: f64,
    pub predictors: Vec<PredictorSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ekf_diagnostics: Option<EkfDiagnostics>,
}

impl Summary {
    pub fn predictor(&self, kind: PredictorKind) -> Option<&PredictorSummary> {
        self.predictors.iter().find(|p| p.predictor == kind)
    }
}

fn median(samples: &[f64]) -> Option<f64> {
    quantile(samples, 0.5).ok()
}

/// Aggregates records into per-predictor statistics.
///
/// Feasibility is judged at the true SINR: a TTI is feasible for a target
/// when the most robust MCS meets it there.
pub fn summarize(records: &[TtiRecord], table: &McsTable, target_bler: f64) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let kinds: Vec<PredictorKind> = records[0].predictions.iter().map(|p| p.kind).collect();
    let n_subnets = records.iter().map(|r| r.subnet).max().unwrap_or(0) + 1;

    let mut predictors = Vec::with_capacity(kinds.len());
    for (slot, &kind) in kinds.iter().enumerate() {
        let mut raes = Vec::with_capacity(records.len());
        let mut per_subnet = vec![Vec::new(); n_subnets];
        let mut skipped = 0;
        let mut blers = Vec::with_capacity(records.len());
        let mut feasible_blers = Vec::new();
        for r in records {
            let p = &r.predictions[slot];
            debug_assert_eq!(p.kind, kind);
            match rae(r.true_ipv, p.pred_ipv) {
                Ok(e) => {
                    raes.push(e);
                    per_subnet[r.subnet].push(e);
                }
                Err(_) => skipped += 1,
            }
            blers.push(p.achieved_bler);
            if table.feasible(r.true_sinr_db, target_bler) {
                feasible_blers.push(p.achieved_bler);
            }
        }
        let met = feasible_blers.iter().filter(|&&b| b <= target_bler).count();
        let sweep = SWEEP_TARGETS
            .iter()
            .map(|&target| {
                let achieved: Vec<f64> = records
                    .iter()
                    .filter(|r| table.feasible(r.true_sinr_db, target))
                    .map(|r| {
                        let s = table.select(r.predictions[slot].adjusted_sinr_db, target);
                        table.achieved_bler(s.index, r.true_sinr_db)
                    })
                    .collect();
                SweepRow {
                    target_bler: target,
                    feasible_ttis: achieved.len(),
                    p95_achieved_bler: quantile(&achieved, 0.95).ok(),
                    fraction_meeting_target: (!achieved.is_empty())
                        .then(|| achieved.iter().filter(|&&b| b <= target).count() as f64 / achieved.len() as f64),
                }
            })
            .collect();
        let median_rae = median(&raes);
        predictors.push(PredictorSummary {
            predictor: kind,
            median_rae,
            median_rae_db: median_rae.map(linear_to_db),
            rae_skipped: skipped,
            feasible_ttis: feasible_blers.len(),
            met_target: met,
            fraction_meeting_target: (!feasible_blers.is_empty()).then(|| met as f64 / feasible_blers.len() as f64),
            p95_achieved_bler: quantile(&blers, 0.95).ok(),
            sweep,
            per_subnet_median_rae: per_subnet.iter().map(|s| median(s)).collect(),
            rae_ecdf: ecdf(&raes).unwrap_or_default(),
            bler_ecdf: ecdf(&blers)?,
        });
    }
    Ok(Summary {
        records: records.len(),
        target_bler,
        predictors,
        ekf_diagnostics: None,
    })
}
