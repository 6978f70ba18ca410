//! Result rows and their CSV / JSON serialization.
//!
//! Floats are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::OutputFormat;

pub const COLUMNS: [&str; 13] = [
    "method",
    "order",
    "n_grid",
    "n_traj",
    "model",
    "gamma",
    "T",
    "metric",
    "value",
    "stderr",
    "wallclock_s",
    "seed",
    "version",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub order: Option<usize>,
    pub n_grid: Option<usize>,
    pub n_traj: u64,
    pub model: String,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub wallclock_s: f64,
    pub seed: Option<u64>,
    pub version: String,
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl ResultRow {
    fn fields(&self) -> [String; 13] {
        [
            self.method.clone(),
            opt(&self.order),
            opt(&self.n_grid),
            self.n_traj.to_string(),
            self.model.clone(),
            format_float(self.gamma),
            format_float(self.t_final),
            self.metric.clone(),
            format_float(self.value),
            self.stderr.map(format_float).unwrap_or_default(),
            format_float(self.wallclock_s),
            opt(&self.seed),
            self.version.clone(),
        ]
    }
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(COLUMNS).map_err(io)?;
    for row in rows {
        w.write_record(row.fields()).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// JSON array of flat objects, keys in column order.
pub fn to_json(rows: &[ResultRow]) -> String {
    let quote = |s: &str| serde_json::to_string(s).expect("string serializes");
    let mut out = String::from("[");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        let values = row.fields();
        for (j, (key, value)) in COLUMNS.iter().zip(values).enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let rendered = match *key {
                "method" | "model" | "metric" | "version" => quote(&value),
                _ if value.is_empty() => "null".to_string(),
                _ => value,
            };
            out.push_str(&format!("{}: {rendered}", quote(key)));
        }
        out.push('}');
    }
    out.push_str(if rows.is_empty() { "]\n" } else { "\n]\n" });
    out
}

pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => Ok(to_json(rows)),
    }
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn emit(rows: &[ResultRow], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = render(rows, format)?;
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Config(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != COLUMNS {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::Config(e.to_string()))).collect()
}

pub fn parse_json(text: &str) -> Result<Vec<ResultRow>> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}
