//! CSV tables exchanged between commands: per-recording features, split
//! assignments and skip reports.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{AnalyticsError, FeatureMatrix};
use crate::audio_io::{ManifestEntry, Period, SarnatLabel, Site};

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: bad value `{value}` in column `{column}`")]
    BadValue { row: usize, column: String, value: String },
    #[error("row {row} has {got} feature values, expected {expected}")]
    RowWidth { row: usize, got: usize, expected: usize },
    #[error("no split assigned to `{0}`")]
    MissingSplit(String),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRow {
    pub path: PathBuf,
    pub split: Split,
}

pub const SPLIT_HEADER: [&str; 2] = ["path", "split"];

pub fn write_splits(writer: impl Write, rows: &[SplitRow]) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(SPLIT_HEADER)?;
    for r in rows {
        wtr.write_record([r.path.to_string_lossy().as_ref(), r.split.as_str()])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_splits(reader: impl Read) -> Result<Vec<SplitRow>, TableError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TableError::MissingColumn(name.to_string()))
    };
    let (c_path, c_split) = (find("path")?, find("split")?);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let value = rec.get(c_split).unwrap_or("");
        let split = value.parse().map_err(|_| TableError::BadValue {
            row: i + 1,
            column: "split".into(),
            value: value.to_string(),
        })?;
        rows.push(SplitRow {
            path: PathBuf::from(rec.get(c_path).unwrap_or("")),
            split,
        });
    }
    Ok(rows)
}

/// Columns leading every feature table row.
pub const ID_COLUMNS: [&str; 5] = ["path", "patient_id", "site", "period", "label"];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub entry: ManifestEntry,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, rows: Vec::new() }
    }

    pub fn write(&self, writer: impl Write) -> Result<(), TableError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let header: Vec<&str> = ID_COLUMNS.iter().copied().chain(self.names.iter().map(String::as_str)).collect();
        wtr.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            if row.values.len() != self.names.len() {
                return Err(TableError::RowWidth {
                    row: i + 1,
                    got: row.values.len(),
                    expected: self.names.len(),
                });
            }
            let e = &row.entry;
            let mut record = vec![
                e.path.to_string_lossy().into_owned(),
                e.patient_id.clone(),
                e.site.to_string(),
                e.period.to_string(),
                e.label.to_string(),
            ];
            record.extend(row.values.iter().map(|v| v.to_string()));
            wtr.write_record(&record)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read(reader: impl Read) -> Result<Self, TableError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        for (i, name) in ID_COLUMNS.iter().enumerate() {
            if headers.get(i) != Some(*name) {
                return Err(TableError::MissingColumn(name.to_string()));
            }
        }
        let names: Vec<String> = headers.iter().skip(ID_COLUMNS.len()).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec?;
            let bad = |column: &str, value: &str| TableError::BadValue {
                row,
                column: column.to_string(),
                value: value.to_string(),
            };
            let get = |c: usize| rec.get(c).unwrap_or("");
            let period: Period = get(3).parse().map_err(|_| bad("period", get(3)))?;
            let label: SarnatLabel = get(4).parse().map_err(|_| bad("label", get(4)))?;
            let mut values = Vec::with_capacity(names.len());
            for (j, name) in names.iter().enumerate() {
                let raw = get(ID_COLUMNS.len() + j);
                values.push(raw.parse::<f64>().map_err(|_| bad(name, raw))?);
            }
            rows.push(FeatureRow {
                entry: ManifestEntry {
                    path: PathBuf::from(get(0)),
                    patient_id: get(1).to_string(),
                    site: Site::parse_lenient(get(2)),
                    period,
                    label,
                },
                values,
            });
        }
        Ok(Self { names, rows })
    }

    /// Rows with a binary label, restricted to `columns` (all columns when
    /// `None`) and to the rows accepted by `keep`.
    pub fn to_matrix(
        &self,
        columns: Option<&[String]>,
        mut keep: impl FnMut(&FeatureRow) -> bool,
    ) -> Result<FeatureMatrix, TableError> {
        let names: Vec<String> = columns.map_or_else(|| self.names.clone(), |c| c.to_vec());
        let index: HashMap<&str, usize> = self.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let cols: Vec<usize> = names
            .iter()
            .map(|n| index.get(n.as_str()).copied().ok_or_else(|| TableError::MissingColumn(n.clone())))
            .collect::<Result<_, _>>()?;
        let rows: Vec<&FeatureRow> = self
            .rows
            .iter()
            .filter(|r| r.entry.binary_label().is_some() && keep(r))
            .collect();
        let values = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| rows[i].values[cols[j]]);
        Ok(FeatureMatrix::new(
            names,
            values,
            rows.iter().map(|r| r.entry.binary_label().unwrap_or(0)).collect(),
            rows.iter().map(|r| r.entry.site).collect(),
            rows.iter().map(|r| r.entry.patient_id.clone()).collect(),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipRow {
    pub path: PathBuf,
    pub reason: String,
}

pub fn write_skips(writer: impl Write, rows: &[SkipRow]) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["path", "reason"])?;
    for r in rows {
        wtr.write_record([r.path.to_string_lossy().as_ref(), r.reason.as_str()])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_skips(reader: impl Read) -> Result<Vec<SkipRow>, TableError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(SkipRow {
            path: PathBuf::from(rec.get(0).unwrap_or("")),
            reason: rec.get(1).unwrap_or("").to_string(),
        });
    }
    Ok(rows)
}
