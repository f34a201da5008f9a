//! CSV and JSON emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{AlgorithmId, OracleId};
use super::runner::{CellOutput, RunSummary};
use crate::error::{Error, Result};
use crate::metrics::RoundRecord;

pub const RECORDS_HEADER: &str = "t,f_val,g_val,lambda,x_hash";

/// Writes the per-round log: 17 significant digits, `\n` line endings.
pub fn write_records_csv<W: Write>(records: &[RoundRecord], mut w: W) -> Result<()> {
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(w, "{},{:.16e},{:.16e},{:.16e},{}", r.t, r.f_val, r.g_val, r.lambda, r.x_hash)?;
    }
    Ok(())
}

pub fn records_csv(records: &[RoundRecord]) -> String {
    let mut buf = Vec::with_capacity(records.len() * 96);
    write_records_csv(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
pub fn write_cell(dir: &Path, output: &CellOutput) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let stem = output.cell.stem();
    let csv_path = dir.join(format!("{stem}.csv"));
    fs::write(&csv_path, records_csv(&output.log.records))?;
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(&output.summary)? + "\n")?;
    Ok((csv_path, json_path))
}

/// One line of the merged sweep table. Wall time is left out so the file is
/// reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: AlgorithmId,
    pub oracle: Option<OracleId>,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub beta: f64,
    pub seed: u64,
    pub regret: f64,
    pub violation: f64,
    pub cumulative_violation: f64,
    pub lambda_sq_sum: f64,
    pub benchmark_gap: f64,
    pub benchmark_converged: bool,
}

impl From<&RunSummary> for SweepRow {
    fn from(s: &RunSummary) -> Self {
        Self {
            algorithm: s.algorithm,
            oracle: s.oracle,
            horizon: s.horizon,
            beta: s.beta,
            seed: s.seed,
            regret: s.regret,
            violation: s.violation,
            cumulative_violation: s.cumulative_violation,
            lambda_sq_sum: s.lambda_sq_sum,
            benchmark_gap: s.benchmark_gap,
            benchmark_converged: s.benchmark_converged,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("sweep CSV: {e}"))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: usize, g: f64) -> RoundRecord {
        RoundRecord {
            t,
            f_val: 0.1,
            g_val: g,
            lambda: 0.0,
            x_hash: "00000000000000ff".into(),
        }
    }

    #[test]
    fn records_format_is_fixed() {
        let text = records_csv(&[record(1, -1.0), record(2, 1.0 / 3.0)]);
        assert_eq!(
            text,
            "t,f_val,g_val,lambda,x_hash\n\
             1,1.0000000000000001e-1,-1.0000000000000000e0,0.0000000000000000e0,00000000000000ff\n\
             2,1.0000000000000001e-1,3.3333333333333331e-1,0.0000000000000000e0,00000000000000ff\n"
        );
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let v: f64 = 0.1 + 0.2;
        let text = format!("{v:.16e}");
        assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn sweep_csv_round_trips() {
        let dir = std::env::temp_dir().join(format!("pfoco-sweep-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sweep.csv");
        let rows = vec![SweepRow {
            algorithm: AlgorithmId::Pdmfw,
            oracle: None,
            horizon: 64,
            beta: 0.1,
            seed: 3,
            regret: 4.25,
            violation: -0.5,
            cumulative_violation: 2.0,
            lambda_sq_sum: 0.0,
            benchmark_gap: 1e-7,
            benchmark_converged: true,
        }];
        write_sweep_csv(&path, &rows).unwrap();
        assert_eq!(read_sweep_csv(&path).unwrap(), rows);
        fs::remove_dir_all(&dir).unwrap();
    }
}
