use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelConfig;
use crate::cqi::CqiConfig;
use crate::interference::{NoiseConfig, TrafficConfig};
use crate::link_adaptation::LaConfig;
use crate::predictor::{DssmConfig, PredictorKind};
use crate::scenario::ScenarioConfig;
use crate::{Error, Result};

/// Complete description of a simulation run.
///
/// The text form is TOML with one table per component (`[scenario]`,
/// `[channel]`, `[traffic]`, `[noise]`, `[cqi]`, `[dssm]`, `[la]`) and the
/// run controls under `[run]`. Missing keys take their defaults; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSettings,
    pub scenario: ScenarioConfig,
    pub channel: ChannelConfig,
    pub traffic: TrafficConfig,
    pub noise: NoiseConfig,
    pub cqi: CqiConfig,
    pub dssm: DssmConfig,
    pub la: LaConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    /// TTIs simulated per drop, warm-up included.
    pub n_ttis: usize,
    pub n_drops: usize,
    /// Leading TTIs of each drop excluded from the records.
    pub warmup_ttis: usize,
    pub seed: u64,
    pub predictors: Vec<PredictorKind>,
    pub output_path: PathBuf,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            // 16 devices × 1250 recorded TTIs = 20 000 evaluation records.
            n_ttis: 1350,
            n_drops: 1,
            warmup_ttis: 100,
            seed: 1,
            predictors: PredictorKind::ALL.to_vec(),
            output_path: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.channel.validate()?;
        self.traffic.validate()?;
        self.noise.validate()?;
        self.cqi.validate()?;
        self.dssm.validate()?;
        self.la.validate()?;
        let r = &self.run;
        if r.warmup_ttis < 2 {
            return Err(Error::InvalidConfig("run: warmup_ttis must be at least 2".into()));
        }
        if r.n_ttis <= r.warmup_ttis {
            return Err(Error::InvalidConfig("run: n_ttis must exceed warmup_ttis".into()));
        }
        if r.n_drops == 0 {
            return Err(Error::InvalidConfig("run: n_drops must be at least 1".into()));
        }
        if r.predictors.is_empty() {
            return Err(Error::InvalidConfig("run: at least one predictor must be enabled".into()));
        }
        Ok(())
    }

    /// Enabled predictors in canonical order, without duplicates.
    pub fn predictors(&self) -> Vec<PredictorKind> {
        PredictorKind::ALL
            .into_iter()
            .filter(|k| self.run.predictors.contains(k))
            .collect()
    }

    /// Records produced per drop.
    pub fn records_per_drop(&self) -> usize {
        self.scenario.n_subnets * (self.run.n_ttis - self.run.warmup_ttis)
    }

    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let location = e.span().map(|span| {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}")
            });
            Error::parse(location, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::parse(None, e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: Some(match location {
                    Some(l) => format!("{}:{l}", path.display()),
                    None => path.display().to_string(),
                }),
                message,
            },
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }
}

/// Reads and validates a run configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    RunConfig::load(path)
}
