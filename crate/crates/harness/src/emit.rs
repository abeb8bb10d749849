//! Result files. CSV floats carry 17 significant digits, enough to
//! recover every `f64` exactly; JSON is an array of row objects.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::format::Family;
use crate::sweep::ResultRow;

pub const CSV_HEADER: [&str; 12] = [
    "manifold",
    "n",
    "k",
    "N",
    "sigma",
    "trial",
    "seed",
    "error",
    "final_cost",
    "iterations",
    "converged",
    "runtime_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        HarnessError::parse(path, e)
    }
}

/// Write rows as CSV to any sink; `path` only labels errors.
pub fn write_csv<W: Write>(rows: &[ResultRow], sink: W, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.manifold.name().to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.steps.to_string(),
            float(r.sigma),
            r.trial.to_string(),
            r.seed.to_string(),
            optional(r.error),
            optional(r.final_cost),
            r.iterations.to_string(),
            r.converged.to_string(),
            float(r.runtime_ms),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, mut sink: W, path: &Path) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, sink, path),
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, rows).map_err(|e| HarnessError::parse(path, e))?;
            sink.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
            sink.flush().map_err(|e| HarnessError::io(path, e))
        }
    }
}

/// Write rows to `path`, replacing any existing file.
pub fn emit(rows: &[ResultRow], format: Format, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_rows(rows, format, BufWriter::new(file), path)
}

pub fn read_rows(path: &Path, format: Format) -> Result<Vec<ResultRow>> {
    match format {
        Format::Json => crate::format::read_json(path),
        Format::Csv => {
            let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
            let header = r.headers().map_err(|e| csv_error(path, e))?;
            if header.iter().ne(CSV_HEADER) {
                return Err(HarnessError::parse(path, "unexpected CSV header"));
            }
            let mut rows = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(|e| csv_error(path, e))?;
                rows.push(parse_record(&rec).map_err(|m| HarnessError::parse(path, m))?);
            }
            Ok(rows)
        }
    }
}

fn parse_record(rec: &csv::StringRecord) -> std::result::Result<ResultRow, String> {
    if rec.len() != CSV_HEADER.len() {
        return Err(format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()));
    }
    fn num<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("bad {what} value {s:?}"))
    }
    fn opt(s: &str, what: &str) -> std::result::Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, what).map(Some)
        }
    }
    let manifold: Family = serde_json::from_value(serde_json::Value::String(rec[0].to_string()))
        .map_err(|_| format!("bad manifold {:?}", &rec[0]))?;
    Ok(ResultRow {
        manifold,
        n: num(&rec[1], "n")?,
        k: num(&rec[2], "k")?,
        steps: num(&rec[3], "N")?,
        sigma: num(&rec[4], "sigma")?,
        trial: num(&rec[5], "trial")?,
        seed: num(&rec[6], "seed")?,
        error: opt(&rec[7], "error")?,
        final_cost: opt(&rec[8], "final_cost")?,
        iterations: num(&rec[9], "iterations")?,
        converged: num(&rec[10], "converged")?,
        runtime_ms: num(&rec[11], "runtime_ms")?,
    })
}
