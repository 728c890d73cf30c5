use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("could not place {subnets} sub-networks with the required separation after {attempts} attempts")]
    PlacementInfeasible { subnets: usize, attempts: u64 },

    #[error("CQI index {index} out of range for {levels} levels")]
    IndexOutOfRange { index: usize, levels: usize },

    #[error("degenerate SINR denominator: interference + noise = {0}")]
    DegenerateDenominator(f64),

    #[error("numerical breakdown in filter update: innovation variance = {0}")]
    NumericalBreakdown(f64),

    #[error("relative error undefined for zero true interference")]
    DegenerateTruth,

    #[error("empty input")]
    EmptyInput,

    #[error("parse error{}: {message}", location.as_deref().map(|l| format!(" at {l}")).unwrap_or_default())]
    Parse {
        location: Option<String>,
        message: String,
    },

    #[error("MCS table not monotone: {0}")]
    MonotonicityViolation(String),

    #[error("drop {drop}, tti {tti}, subnet {subnet}: {source}")]
    Drop {
        drop: usize,
        tti: usize,
        subnet: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<Option<String>>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
