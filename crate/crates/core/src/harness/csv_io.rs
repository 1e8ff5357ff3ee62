use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use super::sweep::SweepResult;

pub const CSV_HEADER: [&str; 9] = [
    "domain",
    "policy",
    "probability",
    "mean_goals",
    "mean_discrepancies",
    "mean_penalty_points",
    "mean_gold",
    "mean_deaths",
    "episodes",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: {reason}")]
    Value { row: usize, reason: String },
}

/// One parsed row of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub domain: String,
    pub policy: String,
    pub probability: u8,
    pub mean_goals: f64,
    pub mean_discrepancies: f64,
    pub mean_penalty_points: f64,
    pub mean_gold: f64,
    pub mean_deaths: f64,
    pub episodes: usize,
}

/// Write the rows of `results` in order: per result, policy then
/// probability ascending.
pub fn write_csv<W: Write>(results: &[&SweepResult], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for result in results {
        for (&(policy, p), m) in &result.cells {
            w.write_record([
                result.domain.name().to_string(),
                policy.name().to_string(),
                p.to_string(),
                format!("{:.4}", m.goals),
                format!("{:.4}", m.discrepancies),
                format!("{:.4}", m.penalty_points),
                format!("{:.4}", m.gold),
                format!("{:.4}", m.deaths),
                m.episodes.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(results: &[&SweepResult], path: &Path) -> Result<(), CsvError> {
    let io_err = |source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut buf = io::BufWriter::new(file);
    write_csv(results, &mut buf).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => CsvError::Value {
            row: 0,
            reason: format!("{other:?}"),
        },
    })?;
    buf.flush().map_err(io_err)
}

/// Parse sweep CSV text, checking the header and value ranges.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>, CsvError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(CsvError::Header(header));
    }
    let mut rows = Vec::new();
    for (i, row) in r.deserialize::<CsvRow>().enumerate() {
        let row = row?;
        let means = [
            row.mean_goals,
            row.mean_discrepancies,
            row.mean_penalty_points,
            row.mean_gold,
            row.mean_deaths,
        ];
        if means.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(CsvError::Value {
                row: i + 1,
                reason: "means must be finite and non-negative".into(),
            });
        }
        if row.episodes == 0 {
            return Err(CsvError::Value {
                row: i + 1,
                reason: "episodes must be positive".into(),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}
