use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::metrics::Summary;
use super::run::{PredictionRecord, TtiRecord};
use crate::predictor::PredictorKind;
use crate::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ECDF_RAE_FILE: &str = "ecdf_rae.csv";
pub const ECDF_BLER_FILE: &str = "ecdf_bler.csv";
pub const CONFIG_FILE: &str = "config.toml";

const BASE_COLUMNS: [&str; 6] = ["drop", "tti", "subnet", "true_ipv", "true_sinr_db", "cqi_index"];
const PREDICTOR_COLUMNS: [&str; 5] = ["pred_ipv", "adjusted_sinr_db", "mcs", "achieved_bler", "infeasible"];

fn header(kinds: &[PredictorKind]) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|c| c.to_string()).collect();
    for k in kinds {
        cols.extend(PREDICTOR_COLUMNS.iter().map(|c| format!("{c}_{k}")));
    }
    cols
}

/// Writes records with a header row. Floats use the shortest representation
/// that round-trips, so equal records give equal bytes.
pub fn write_records<W: Write>(records: &[TtiRecord], kinds: &[PredictorKind], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header(kinds))?;
    let mut row: Vec<String> = Vec::new();
    for r in records {
        row.clear();
        row.extend([
            r.drop.to_string(),
            r.tti.to_string(),
            r.subnet.to_string(),
            r.true_ipv.to_string(),
            r.true_sinr_db.to_string(),
            r.cqi_index.to_string(),
        ]);
        for p in &r.predictions {
            row.extend([
                p.pred_ipv.to_string(),
                p.adjusted_sinr_db.to_string(),
                p.mcs.to_string(),
                p.achieved_bler.to_string(),
                u8::from(p.infeasible).to_string(),
            ]);
        }
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io(RECORDS_FILE, e))?;
    Ok(())
}

/// Reads records written by [`write_records`], recovering the predictor set
/// from the header.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<TtiRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < BASE_COLUMNS.len() || cols[..BASE_COLUMNS.len()] != BASE_COLUMNS {
        return Err(Error::parse(Some("line 1".into()), "unexpected records header"));
    }
    let rest = &cols[BASE_COLUMNS.len()..];
    if !rest.len().is_multiple_of(PREDICTOR_COLUMNS.len()) {
        return Err(Error::parse(Some("line 1".into()), "incomplete predictor column group"));
    }
    let kinds = rest
        .chunks(PREDICTOR_COLUMNS.len())
        .map(|chunk| {
            let kind = chunk[0]
                .strip_prefix("pred_ipv_")
                .ok_or_else(|| Error::parse(Some("line 1".into()), format!("unexpected column `{}`", chunk[0])))?
                .parse::<PredictorKind>()
                .map_err(|e| Error::parse(Some("line 1".into()), e.to_string()))?;
            for (c, name) in chunk.iter().zip(PREDICTOR_COLUMNS) {
                if *c != format!("{name}_{kind}") {
                    return Err(Error::parse(Some("line 1".into()), format!("unexpected column `{c}`")));
                }
            }
            Ok(kind)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |j: usize| -> Result<&str> {
            row.get(j)
                .ok_or_else(|| Error::parse(Some(format!("line {line}")), "missing field"))
        };
        fn num<T: std::str::FromStr>(s: &str, line: usize, col: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::parse(Some(format!("line {line}")), format!("bad value `{s}` in column {col}")))
        }
        let mut predictions = Vec::with_capacity(kinds.len());
        for (k, &kind) in kinds.iter().enumerate() {
            let base = BASE_COLUMNS.len() + k * PREDICTOR_COLUMNS.len();
            predictions.push(PredictionRecord {
                kind,
                pred_ipv: num(field(base)?, line, "pred_ipv")?,
                adjusted_sinr_db: num(field(base + 1)?, line, "adjusted_sinr_db")?,
                mcs: num(field(base + 2)?, line, "mcs")?,
                achieved_bler: num(field(base + 3)?, line, "achieved_bler")?,
                infeasible: num::<u8>(field(base + 4)?, line, "infeasible")? != 0,
            });
        }
        out.push(TtiRecord {
            drop: num(field(0)?, line, "drop")?,
            tti: num(field(1)?, line, "tti")?,
            subnet: num(field(2)?, line, "subnet")?,
            true_ipv: num(field(3)?, line, "true_ipv")?,
            true_sinr_db: num(field(4)?, line, "true_sinr_db")?,
            cqi_index: num(field(5)?, line, "cqi_index")?,
            predictions,
        });
    }
    Ok(out)
}

pub fn write_ecdfs<W1: Write, W2: Write>(summary: &Summary, rae_out: W1, bler_out: W2) -> Result<()> {
    let mut rae = csv::Writer::from_writer(rae_out);
    rae.write_record(["predictor", "rae", "rae_db", "cdf"])?;
    let mut bler = csv::Writer::from_writer(bler_out);
    bler.write_record(["predictor", "achieved_bler", "cdf"])?;
    for p in &summary.predictors {
        let name = p.predictor.as_str();
        for &(x, c) in &p.rae_ecdf {
            rae.write_record([name.to_string(), x.to_string(), crate::linear_to_db(x).to_string(), c.to_string()])?;
        }
        for &(x, c) in &p.bler_ecdf {
            bler.write_record([name.to_string(), x.to_string(), c.to_string()])?;
        }
    }
    rae.flush().map_err(|e| Error::io(ECDF_RAE_FILE, e))?;
    bler.flush().map_err(|e| Error::io(ECDF_BLER_FILE, e))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn save_records(path: &Path, records: &[TtiRecord], kinds: &[PredictorKind]) -> Result<()> {
    write_records(records, kinds, create(path)?)
}

pub fn load_records(path: &Path) -> Result<Vec<TtiRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(std::io::BufReader::new(file))
}

/// Writes `summary.json`, `ecdf_rae.csv` and `ecdf_bler.csv` into `dir`.
pub fn save_summary(dir: &Path, summary: &Summary) -> Result<()> {
    let path = dir.join(SUMMARY_FILE);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, summary)?;
    w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_ecdfs(
        summary,
        create(&dir.join(ECDF_RAE_FILE))?,
        create(&dir.join(ECDF_BLER_FILE))?,
    )
}

/// Plain-text table of the headline statistics.
pub fn format_summary(summary: &Summary) -> String {
    let opt = |v: Option<f64>, prec: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"));
    let sci = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2e}"));
    let mut s = format!(
        "records: {}   target BLER: {:e}\n\n{:<8}{:>14}{:>18}{:>16}{:>14}\n",
        summary.records, summary.target_bler, "pred", "median RAE dB", "meets target", "feasible TTIs", "p95 BLER"
    );
    for p in &summary.predictors {
        s += &format!(
            "{:<8}{:>14}{:>18}{:>16}{:>14}\n",
            p.predictor.as_str(),
            opt(p.median_rae_db, 2),
            opt(p.fraction_meeting_target.map(|f| 100.0 * f), 2) + " %",
            p.feasible_ttis,
            sci(p.p95_achieved_bler),
        );
    }
    s += "\np95 achieved BLER by target\n";
    s += &format!("{:<8}", "pred");
    if let Some(p) = summary.predictors.first() {
        for row in &p.sweep {
            s += &format!("{:>11}", format!("{:.0e}", row.target_bler));
        }
    }
    s += "\n";
    for p in &summary.predictors {
        s += &format!("{:<8}", p.predictor.as_str());
        for row in &p.sweep {
            s += &format!("{:>11}", sci(row.p95_achieved_bler));
        }
        s += "\n";
    }
    if let Some(d) = summary.ekf_diagnostics {
        s += &format!(
            "\nEKF updates: {}   covariance contraction violations: {}\n",
            d.updates, d.contraction_violations
        );
    }
    s
}
