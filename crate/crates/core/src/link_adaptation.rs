//! MCS tables, rate-maximal MCS selection under a BLER target, and achieved
//! BLER scoring.
//!
//! Tables are either generated analytically from the finite-blocklength
//! normal approximation or loaded from a CSV file with the columns
//! `mcs_id,spectral_efficiency,sinr_db,bler` (one row per curve point,
//! rows of one MCS contiguous and ordered by SINR).

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{linear_to_db, Error, Result};

/// Spectral efficiencies (bits per channel use) of the 29 entries of the
/// low-SE 5G NR PDSCH MCS index table (TS 38.214 Table 5.1.3.1-3), computed
/// as `Qm · R/1024` with the code rates below.
pub const NR_MCS_TABLE3: [(u32, u32); 29] = [
    (2, 30),
    (2, 40),
    (2, 50),
    (2, 64),
    (2, 78),
    (2, 99),
    (2, 120),
    (2, 157),
    (2, 193),
    (2, 251),
    (2, 308),
    (2, 379),
    (2, 449),
    (2, 526),
    (2, 602),
    (4, 340),
    (4, 378),
    (4, 434),
    (4, 490),
    (4, 553),
    (4, 616),
    (6, 438),
    (6, 466),
    (6, 517),
    (6, 567),
    (6, 616),
    (6, 666),
    (6, 719),
    (6, 772),
];

pub fn nr_table3_efficiencies() -> Vec<f64> {
    NR_MCS_TABLE3
        .iter()
        .map(|&(qm, rate)| qm as f64 * rate as f64 / 1024.0)
        .collect()
}

/// Analytic curves are tabulated from `GRID_MIN_DB` to `GRID_MAX_DB`.
pub const GRID_MIN_DB: f64 = -20.0;
pub const GRID_MAX_DB: f64 = 40.0;
/// Grid points per dB.
pub const GRID_POINTS_PER_DB: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaConfig {
    pub target_bler: f64,
    pub packet_bits: u32,
    /// CSV table to load. The analytic table is generated when unset.
    pub table_path: Option<PathBuf>,
}

impl Default for LaConfig {
    fn default() -> Self {
        Self {
            target_bler: 1e-5,
            packet_bits: 160,
            table_path: None,
        }
    }
}

impl LaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_bler > 0.0 && self.target_bler < 1.0) {
            return Err(Error::InvalidConfig("la: target_bler must be in (0, 1)".into()));
        }
        if self.packet_bits == 0 {
            return Err(Error::InvalidConfig("la: packet_bits must be positive".into()));
        }
        Ok(())
    }

    /// Loads the configured table, or builds the analytic one.
    pub fn table(&self) -> Result<McsTable> {
        match &self.table_path {
            Some(path) => McsTable::load_csv(path),
            None => Ok(McsTable::analytic(self.packet_bits, &nr_table3_efficiencies())),
        }
    }
}

/// BLER as a function of SINR, linearly interpolated between points.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerCurve {
    sinr_db: Vec<f64>,
    bler: Vec<f64>,
}

impl BlerCurve {
    pub fn new(sinr_db: Vec<f64>, bler: Vec<f64>) -> Result<Self> {
        if sinr_db.is_empty() || sinr_db.len() != bler.len() {
            return Err(Error::parse(None, "curve needs matching, non-empty SINR and BLER columns"));
        }
        if let Some(w) = sinr_db.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::MonotonicityViolation(format!(
                "SINR points must strictly increase ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(b) = bler.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::parse(None, format!("BLER {b} outside [0, 1]")));
        }
        if let Some(i) = (1..bler.len()).find(|&i| bler[i] > bler[i - 1]) {
            return Err(Error::MonotonicityViolation(format!(
                "BLER rises from {} to {} between {} dB and {} dB",
                bler[i - 1],
                bler[i],
                sinr_db[i - 1],
                sinr_db[i]
            )));
        }
        Ok(Self { sinr_db, bler })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sinr_db.iter().copied().zip(self.bler.iter().copied())
    }

    /// BLER at `sinr_db`. Below the first point the link fails outright;
    /// above the last point the last value holds.
    pub fn eval(&self, sinr_db: f64) -> f64 {
        let xs = &self.sinr_db;
        if !(sinr_db >= xs[0]) {
            return 1.0;
        }
        let last = xs.len() - 1;
        if sinr_db >= xs[last] {
            return self.bler[last];
        }
        // xs[i] <= sinr_db < xs[i + 1]
        let i = xs.partition_point(|&x| x <= sinr_db) - 1;
        let t = (sinr_db - xs[i]) / (xs[i + 1] - xs[i]);
        self.bler[i] + t * (self.bler[i + 1] - self.bler[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McsEntry {
    pub id: u32,
    pub spectral_efficiency: f64,
    pub curve: BlerCurve,
}

/// MCS entries ordered by ascending spectral efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

/// Outcome of MCS selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    /// Position of the chosen entry in the table.
    pub index: usize,
    pub id: u32,
    /// No entry met the target; the most robust one was returned.
    pub infeasible: bool,
}

/// Standard normal tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Normal-approximation block error probability of a `packet_bits` packet
/// sent over `blocklength` channel uses at linear SINR `sinr`.
pub fn normal_approx_bler(sinr: f64, blocklength: f64, packet_bits: f64) -> f64 {
    let log2e = std::f64::consts::LOG2_E;
    let capacity = (1.0 + sinr).log2();
    let dispersion = sinr * (sinr + 2.0) / ((sinr + 1.0) * (sinr + 1.0)) * log2e * log2e;
    let arg = (blocklength * capacity - packet_bits + 0.5 * blocklength.log2()) / (blocklength * dispersion).sqrt();
    q_function(arg)
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::parse(None, "MCS table is empty"));
        }
        if let Some(w) = entries
            .windows(2)
            .find(|w| !(w[1].spectral_efficiency > w[0].spectral_efficiency))
        {
            return Err(Error::MonotonicityViolation(format!(
                "spectral efficiency must increase from MCS {} to MCS {}",
                w[0].id, w[1].id
            )));
        }
        Ok(Self { entries })
    }

    /// Finite-blocklength table: MCS `i` carries the packet in
    /// `ceil(k / SE_i)` channel uses.
    pub fn analytic(packet_bits: u32, efficiencies: &[f64]) -> Self {
        let k = packet_bits as f64;
        let points = (GRID_MAX_DB - GRID_MIN_DB) as usize * GRID_POINTS_PER_DB + 1;
        let grid: Vec<f64> = (0..points)
            .map(|i| GRID_MIN_DB + i as f64 / GRID_POINTS_PER_DB as f64)
            .collect();
        let entries = efficiencies
            .iter()
            .enumerate()
            .map(|(id, &se)| {
                let n = (k / se).ceil();
                let mut floor = 1.0f64;
                // Running minimum irons out rounding wiggles in the saturated tails.
                let bler = grid
                    .iter()
                    .map(|&db| {
                        floor = floor.min(normal_approx_bler(crate::db_to_linear(db), n, k));
                        floor
                    })
                    .collect();
                McsEntry {
                    id: id as u32,
                    spectral_efficiency: se,
                    curve: BlerCurve {
                        sinr_db: grid.clone(),
                        bler,
                    },
                }
            })
            .collect();
        Self::new(entries).expect("efficiencies must be ascending")
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, id: u32) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id)
    }

    /// Highest-rate entry whose BLER at `adjusted_sinr_db` meets `target`.
    pub fn select(&self, adjusted_sinr_db: f64, target: f64) -> Selection {
        match self
            .entries
            .iter()
            .rposition(|e| e.curve.eval(adjusted_sinr_db) <= target)
        {
            Some(index) => Selection {
                index,
                id: self.entries[index].id,
                infeasible: false,
            },
            None => Selection {
                index: 0,
                id: self.entries[0].id,
                infeasible: true,
            },
        }
    }

    /// BLER of the entry at `index` when the channel is at `true_sinr_db`.
    pub fn achieved_bler(&self, index: usize, true_sinr_db: f64) -> f64 {
        self.entries[index].curve.eval(true_sinr_db)
    }

    /// Whether some entry meets `target` at `sinr_db`.
    pub fn feasible(&self, sinr_db: f64, target: f64) -> bool {
        self.entries[0].curve.eval(sinr_db) <= target
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file).map_err(|e| match e {
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

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            mcs_id: u32,
            spectral_efficiency: f64,
            sinr_db: f64,
            bler: f64,
        }

        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::parse(None, e.to_string()))?
            .clone();
        let expected = ["mcs_id", "spectral_efficiency", "sinr_db", "bler"];
        if headers.iter().ne(expected) {
            return Err(Error::parse(
                Some("line 1".to_string()),
                format!("expected header `{}`", expected.join(",")),
            ));
        }

        let mut groups: Vec<(u32, f64, Vec<f64>, Vec<f64>)> = Vec::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let line = Some(format!("line {}", i + 2));
            let row = row.map_err(|e| Error::parse(line.clone(), e.to_string()))?;
            match groups.last_mut() {
                Some(g) if g.0 == row.mcs_id => {
                    if g.1 != row.spectral_efficiency {
                        return Err(Error::parse(line, format!("MCS {} changes spectral efficiency", row.mcs_id)));
                    }
                    g.2.push(row.sinr_db);
                    g.3.push(row.bler);
                }
                _ => {
                    if groups.iter().any(|g| g.0 == row.mcs_id) {
                        return Err(Error::parse(line, format!("rows of MCS {} are not contiguous", row.mcs_id)));
                    }
                    groups.push((row.mcs_id, row.spectral_efficiency, vec![row.sinr_db], vec![row.bler]));
                }
            }
        }
        if groups.is_empty() {
            return Err(Error::parse(None, "no MCS rows"));
        }
        let entries = groups
            .into_iter()
            .map(|(id, se, sinr, bler)| {
                let curve = BlerCurve::new(sinr, bler).map_err(|e| match e {
                    Error::MonotonicityViolation(m) => Error::MonotonicityViolation(format!("MCS {id}: {m}")),
                    Error::Parse { location, message } => Error::Parse {
                        location,
                        message: format!("MCS {id}: {message}"),
                    },
                    other => other,
                })?;
                Ok(McsEntry {
                    id,
                    spectral_efficiency: se,
                    curve,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["mcs_id", "spectral_efficiency", "sinr_db", "bler"])?;
        for e in &self.entries {
            for (x, b) in e.curve.points() {
                wtr.write_record([
                    e.id.to_string(),
                    e.spectral_efficiency.to_string(),
                    x.to_string(),
                    b.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<mcs table>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// SINR in dB after replacing the interference by its prediction.
pub fn adjusted_sinr(signal_power: f64, predicted_ipv: f64, noise: f64) -> f64 {
    linear_to_db(signal_power / (predicted_ipv + noise))
}
