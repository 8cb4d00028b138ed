//! Reading metric spaces and other artifacts from disk.

use std::fs;
use std::path::{Path, PathBuf};

use cat5_core::metric::MetricJson;
use cat5_core::{validate_metric, FiniteMetricSpace, MetricError};
use clap::ValueEnum;
use serde::de::DeserializeOwned;
use thiserror::Error;

/// On-disk encoding of a distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// `{"n": 3, "d": [[...], ...]}`
    Json,
    /// `n` lines of `n` comma-separated reals, no header.
    Csv,
}

impl InputFormat {
    /// `.csv` files are CSV; everything else is JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Json,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Json { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: row {row}, column {col}: {text:?} is not a number")]
    Field { path: PathBuf, row: usize, col: usize, text: String },
    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    RowLength { path: PathBuf, row: usize, found: usize, expected: usize },
    #[error("{path}: row {row}: {message}")]
    Csv { path: PathBuf, row: usize, message: String },
    #[error("{path}: declared n = {declared} but the matrix has {rows} rows")]
    DeclaredSize { path: PathBuf, declared: usize, rows: usize },
    #[error("{path}: {source}")]
    Metric { path: PathBuf, source: MetricError },
}

fn read(path: &Path) -> Result<String, ParseError> {
    fs::read_to_string(path).map_err(|source| ParseError::Io { path: path.to_path_buf(), source })
}

/// Deserializes a JSON file, reporting syntax and shape errors with their position.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ParseError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| ParseError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn parse_csv(path: &Path, text: &str) -> Result<Vec<Vec<f64>>, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ParseError::Csv {
            path: path.to_path_buf(),
            row: e.position().map_or(r + 1, |p| p.record() as usize + 1),
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field.parse::<f64>().map_err(|_| ParseError::Field {
                    path: path.to_path_buf(),
                    row: rows.len() + 1,
                    col: c + 1,
                    text: field.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(ParseError::RowLength {
                    path: path.to_path_buf(),
                    row: rows.len() + 1,
                    found: row.len(),
                    expected: first.len(),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Reads a distance matrix as JSON or CSV and validates it as a metric.
/// Row and column numbers in errors are 1-based.
pub fn parse_input(path: &Path, format: Option<InputFormat>) -> Result<FiniteMetricSpace, ParseError> {
    let format = format.unwrap_or_else(|| InputFormat::from_path(path));
    let rows = match format {
        InputFormat::Json => {
            let raw: MetricJson = read_json(path)?;
            if raw.n != raw.d.len() {
                return Err(ParseError::DeclaredSize { path: path.to_path_buf(), declared: raw.n, rows: raw.d.len() });
            }
            raw.d
        }
        InputFormat::Csv => parse_csv(path, &read(path)?)?,
    };
    validate_metric(&rows).map_err(|source| ParseError::Metric { path: path.to_path_buf(), source })
}
