use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TpsError};
use crate::series::SeriesBatch;

use super::split::SplitSizes;

/// A column picked by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl ColumnSelector {
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            ColumnSelector::Index(i) if *i < headers.len() => Ok(*i),
            ColumnSelector::Index(i) => Err(TpsError::Config(format!(
                "column index {i} out of range ({} columns)",
                headers.len()
            ))),
            ColumnSelector::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| TpsError::Config(format!("no column named {name:?}"))),
        }
    }
}

impl std::str::FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(s.parse::<usize>()
            .map(ColumnSelector::Index)
            .unwrap_or_else(|_| ColumnSelector::Name(s.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub delimiter: u8,
    /// Channel columns; empty means every column except the timestamp.
    pub channels: Vec<ColumnSelector>,
    /// Carried through, never used in computation. `None` picks a column
    /// named `date` when one exists.
    pub timestamp: Option<ColumnSelector>,
    pub split: SplitSizes,
    pub lookback: usize,
    pub horizon: usize,
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>, lookback: usize, horizon: usize) -> Self {
        Self {
            path: path.into(),
            delimiter: b',',
            channels: Vec::new(),
            timestamp: None,
            split: SplitSizes::Fractions {
                train: 0.7,
                val: 0.1,
                test: 0.2,
            },
            lookback,
            horizon,
        }
    }
}

/// A loaded file: one `[1, rows, C]` series plus its column metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub values: SeriesBatch,
    pub channel_names: Vec<String>,
    pub timestamps: Option<Vec<String>>,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.values.time()
    }

    pub fn channels(&self) -> usize {
        self.values.channels()
    }
}

pub fn load_csv(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.lookback == 0 || spec.horizon == 0 {
        return Err(TpsError::Config(format!(
            "look-back and horizon must be positive, got t={} h={}",
            spec.lookback, spec.horizon
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(true)
        .from_path(&spec.path)
        .map_err(|e| csv_error(spec, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(spec, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let timestamp = match &spec.timestamp {
        Some(sel) => Some(sel.resolve(&headers)?),
        None => headers.iter().position(|h| h.eq_ignore_ascii_case("date")),
    };
    let columns: Vec<usize> = if spec.channels.is_empty() {
        (0..headers.len()).filter(|&i| Some(i) != timestamp).collect()
    } else {
        spec.channels
            .iter()
            .map(|sel| sel.resolve(&headers))
            .collect::<Result<_>>()?
    };
    if columns.is_empty() {
        return Err(TpsError::Config("no channel columns selected".into()));
    }

    let mut values = Vec::new();
    let mut stamps = timestamp.map(|_| Vec::new());
    let mut rows = 0usize;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(spec, e))?;
        // line 1 is the header
        let line = r + 2;
        for &col in &columns {
            let field = record.get(col).ok_or_else(|| TpsError::Parse {
                path: spec.path.clone(),
                row: line,
                column: headers[col].clone(),
                message: "missing field".into(),
            })?;
            let v: f64 = field.trim().parse().map_err(|_| TpsError::Parse {
                path: spec.path.clone(),
                row: line,
                column: headers[col].clone(),
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(TpsError::Parse {
                    path: spec.path.clone(),
                    row: line,
                    column: headers[col].clone(),
                    message: format!("non-finite value {field:?}"),
                });
            }
            values.push(v);
        }
        if let (Some(stamps), Some(col)) = (stamps.as_mut(), timestamp) {
            stamps.push(record.get(col).unwrap_or_default().to_string());
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(TpsError::Data(format!(
            "{}: no data rows after the header",
            spec.path.display()
        )));
    }
    Ok(Dataset {
        values: SeriesBatch::new(values, 1, rows, columns.len())?,
        channel_names: columns.iter().map(|&c| headers[c].clone()).collect(),
        timestamps: stamps,
    })
}

fn csv_error(spec: &DatasetSpec, err: csv::Error) -> TpsError {
    let row = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(source) => TpsError::io(&spec.path, source),
        other => TpsError::Parse {
            path: spec.path.clone(),
            row,
            column: String::new(),
            message: format!("{other:?}"),
        },
    }
}
