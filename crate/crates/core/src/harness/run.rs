use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;

use super::world::{DeviceTruth, World};
use crate::cqi::{esm_compress, CqiReport, Quantizer, ReportQueue};
use crate::link_adaptation::{adjusted_sinr, McsTable};
use crate::predictor::{
    correlation_factor, DeliveredReport, EkfDiagnostics, EkfParams, EkfPredictor, GeniePredictor,
    InterferencePredictor, MovingAveragePredictor, Observation, PredictorKind,
};
use crate::rng::{Stream, StreamSeeds};
use crate::{db_to_linear, linear_to_db, Error, Result, RunConfig};

/// Outcome of one predictor for one device in one TTI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    pub kind: PredictorKind,
    pub pred_ipv: f64,
    pub adjusted_sinr_db: f64,
    pub mcs: u32,
    pub achieved_bler: f64,
    pub infeasible: bool,
}

/// One evaluated (drop, TTI, device) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct TtiRecord {
    pub drop: usize,
    pub tti: usize,
    pub subnet: usize,
    pub true_ipv: f64,
    pub true_sinr_db: f64,
    /// CQI index measured in this TTI.
    pub cqi_index: usize,
    /// One entry per enabled predictor, in canonical order.
    pub predictions: Vec<PredictionRecord>,
}

impl TtiRecord {
    pub fn prediction(&self, kind: PredictorKind) -> Option<&PredictionRecord> {
        self.predictions.iter().find(|p| p.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropOutput {
    pub records: Vec<TtiRecord>,
    pub ekf: EkfDiagnostics,
    /// Lower edge of the quantizer range used in this drop, dB.
    pub quantizer_min_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<TtiRecord>,
    pub ekf: EkfDiagnostics,
    pub quantizer_min_db: Vec<f64>,
}

/// Quantile of the pooled true SINR (dB) over a calibration pass run on an
/// independent realization of the drop's world.
pub fn calibrate_quantizer(cfg: &RunConfig, seeds: &StreamSeeds) -> Result<f64> {
    if let Some(min) = cfg.cqi.sinr_min_db {
        return Ok(min);
    }
    let cal_seed = seeds.stream(Stream::Calibration, 0, 0).random::<u64>();
    let mut world = World::new(cfg, &StreamSeeds::new(cal_seed, 0))?;
    let mut truth = Vec::new();
    let mut samples = Vec::with_capacity(cfg.cqi.calibration_ttis * world.n_subnets());
    for _ in 0..cfg.cqi.calibration_ttis {
        world.next_tti(&mut truth);
        samples.extend(truth.iter().map(|d| linear_to_db(d.sinr)));
    }
    samples.sort_by(f64::total_cmp);
    let rank = ((cfg.cqi.calibration_quantile * samples.len() as f64).ceil() as usize).clamp(1, samples.len());
    Ok(samples[rank - 1])
}

struct Device {
    queue: ReportQueue,
    /// `(ipv, signal power)` of the most recent TTIs, newest last.
    history: VecDeque<(f64, f64)>,
    ekf: Option<EkfPredictor>,
    ma: Option<MovingAveragePredictor>,
    genie: Option<GeniePredictor>,
}

impl Device {
    fn predictors(&mut self) -> impl Iterator<Item = &mut dyn InterferencePredictor> {
        let ekf = self.ekf.as_mut().map(|p| p as &mut dyn InterferencePredictor);
        let ma = self.ma.as_mut().map(|p| p as &mut dyn InterferencePredictor);
        let genie = self.genie.as_mut().map(|p| p as &mut dyn InterferencePredictor);
        [ekf, ma, genie].into_iter().flatten()
    }
}

/// Simulates one drop and returns its post-warm-up records.
pub fn run_drop(cfg: &RunConfig, table: &McsTable, drop: usize) -> Result<DropOutput> {
    let seeds = StreamSeeds::new(cfg.run.seed, drop as u64);
    let wrap = |tti: usize, subnet: usize| {
        move |e: Error| Error::Drop {
            drop,
            tti,
            subnet,
            source: Box::new(e),
        }
    };
    let min_db = calibrate_quantizer(cfg, &seeds).map_err(wrap(0, 0))?;
    let quantizer = Quantizer::new(&cfg.cqi, min_db);
    let mut world = World::new(cfg, &seeds).map_err(wrap(0, 0))?;
    let n = world.n_subnets();
    let noise = world.noise();
    let kinds = cfg.predictors();
    let delay = cfg.cqi.report_delay;
    let esm_std = cfg.cqi.esm_std();
    let target = cfg.la.target_bler;

    let group = cfg.scenario.group_size();
    let dopplers = vec![cfg.channel.doppler_freq; group.saturating_sub(1).max(1)];
    let alpha = correlation_factor(cfg.scenario.tti, &dopplers)?;
    let quant_var = cfg.dssm.quant_error_var.unwrap_or_else(|| cfg.cqi.quant_variance());
    let params = EkfParams::from_config(&cfg.dssm, alpha, quant_var);
    let lookahead = if cfg.dssm.delay_compensation { delay } else { 0 };

    let mut devices: Vec<Device> = (0..n)
        .map(|_| Device {
            queue: ReportQueue::new(),
            history: VecDeque::with_capacity(delay.max(2) + 1),
            ekf: kinds
                .contains(&PredictorKind::Ekf)
                .then(|| EkfPredictor::new(params, noise, lookahead)),
            ma: kinds
                .contains(&PredictorKind::Ma)
                .then(|| MovingAveragePredictor::new(cfg.dssm.ma_smoothing, noise)),
            genie: kinds.contains(&PredictorKind::Genie).then_some(GeniePredictor),
        })
        .collect();
    let mut esm_rngs: Vec<_> = (0..n).map(|m| seeds.stream(Stream::EsmNoise, m as u64, 0)).collect();

    let mut records = Vec::with_capacity(cfg.records_per_drop());
    let mut truth: Vec<DeviceTruth> = Vec::with_capacity(n);
    for t in 0..cfg.run.n_ttis {
        world.next_tti(&mut truth);
        for (m, (dev, now)) in devices.iter_mut().zip(&truth).enumerate() {
            let err = wrap(t, m);
            let true_sinr_db = linear_to_db(now.sinr);

            let measured = esm_compress(true_sinr_db, esm_std, &mut esm_rngs[m]);
            let cqi_index = quantizer.quantize(measured);
            dev.queue.push(CqiReport::new(cqi_index, t, delay));

            let report = match dev.queue.deliver(t) {
                Some(r) => {
                    let back = t - r.tti_measured;
                    let (_, signal_power) = dev.history[dev.history.len() - back];
                    Some(DeliveredReport {
                        sinr: db_to_linear(quantizer.dequantize(r.index).map_err(&err)?),
                        signal_power,
                        tti_measured: r.tti_measured,
                    })
                }
                None => None,
            };
            let delayed_ipv = dev.history.len().checked_sub(2).map(|i| dev.history[i].0);
            let obs = Observation {
                tti: t,
                noise,
                signal_power: now.signal_power,
                report,
                delayed_ipv,
                true_ipv: now.ipv,
            };

            let mut predictions = Vec::with_capacity(kinds.len());
            for p in dev.predictors() {
                let pred_ipv = p.predict(&obs).map_err(&err)?;
                let adjusted_sinr_db = adjusted_sinr(now.signal_power, pred_ipv, noise);
                let selection = table.select(adjusted_sinr_db, target);
                predictions.push(PredictionRecord {
                    kind: p.kind(),
                    pred_ipv,
                    adjusted_sinr_db,
                    mcs: selection.id,
                    achieved_bler: table.achieved_bler(selection.index, true_sinr_db),
                    infeasible: selection.infeasible,
                });
            }

            if dev.history.len() > delay.max(2) {
                dev.history.pop_front();
            }
            dev.history.push_back((now.ipv, now.signal_power));

            if t >= cfg.run.warmup_ttis {
                records.push(TtiRecord {
                    drop,
                    tti: t,
                    subnet: m,
                    true_ipv: now.ipv,
                    true_sinr_db,
                    cqi_index,
                    predictions,
                });
            }
        }
    }

    let mut ekf = EkfDiagnostics::default();
    for dev in &devices {
        if let Some(p) = &dev.ekf {
            ekf += p.diagnostics();
        }
    }
    Ok(DropOutput {
        records,
        ekf,
        quantizer_min_db: min_db,
    })
}

/// Runs every drop of `cfg`, in parallel, and merges the records in drop order.
pub fn run(cfg: &RunConfig, table: &McsTable) -> Result<RunOutput> {
    cfg.validate()?;
    let drops = (0..cfg.run.n_drops)
        .into_par_iter()
        .map(|d| run_drop(cfg, table, d))
        .collect::<Result<Vec<_>>>()?;
    let mut out = RunOutput {
        records: Vec::with_capacity(drops.iter().map(|d| d.records.len()).sum()),
        ekf: EkfDiagnostics::default(),
        quantizer_min_db: Vec::with_capacity(drops.len()),
    };
    for d in drops {
        out.records.extend(d.records);
        out.ekf += d.ekf;
        out.quantizer_min_db.push(d.quantizer_min_db);
    }
    Ok(out)
}
