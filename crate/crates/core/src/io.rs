//! CSV ingestion.

use std::collections::HashMap;
use std::path::PathBuf;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A column by header name or 0-based position. Negative positions count
/// from the end (`-1` is the last column).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(i64),
    Name(String),
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<i64>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub path: PathBuf,
    pub delimiter: u8,
    pub has_header: bool,
    pub label_column: ColumnRef,
    /// `None` uses every column except the label.
    pub feature_columns: Option<Vec<ColumnRef>>,
}

impl CsvSchema {
    /// Comma-separated with a header row and the label in the last column.
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            delimiter: b',',
            has_header: true,
            label_column: ColumnRef::Index(-1),
            feature_columns: None,
        }
    }
}

fn resolve(col: &ColumnRef, headers: &[String]) -> Result<usize> {
    let width = headers.len() as i64;
    match col {
        ColumnRef::Index(i) => {
            let idx = if *i < 0 { width + i } else { *i };
            if (0..width).contains(&idx) {
                Ok(idx as usize)
            } else {
                Err(Error::InvalidSpec(format!(
                    "column index {i} out of range for {width} columns"
                )))
            }
        }
        ColumnRef::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidSpec(format!("no column named {name:?}"))),
    }
}

/// Reads a CSV file into a [`Dataset`]. Row order is preserved; labels are
/// mapped to class indices in order of first appearance.
pub fn load_csv(schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .from_path(&schema.path)?;

    let mut records = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => records.push((record.position().map_or(0, |p| p.line()), record.clone())),
            Ok(false) => break,
            Err(e) => {
                let row = e.position().map_or(0, |p| p.line() as usize);
                return Err(Error::Parse {
                    row,
                    column: "-".into(),
                    message: e.to_string(),
                });
            }
        }
    }

    let width = if schema.has_header {
        reader.headers()?.len()
    } else {
        records.first().map_or(0, |(_, r)| r.len())
    };
    let headers: Vec<String> = if schema.has_header {
        reader.headers()?.iter().map(str::to_string).collect()
    } else {
        (0..width).map(|i| i.to_string()).collect()
    };

    let label_col = resolve(&schema.label_column, &headers)?;
    let feature_cols: Vec<usize> = match &schema.feature_columns {
        Some(cols) => cols.iter().map(|c| resolve(c, &headers)).collect::<Result<_>>()?,
        None => (0..width).filter(|&c| c != label_col).collect(),
    };
    if feature_cols.is_empty() {
        return Err(Error::InvalidSpec("at least one feature column is required".into()));
    }
    if feature_cols.contains(&label_col) {
        return Err(Error::InvalidSpec("the label column cannot also be a feature".into()));
    }

    let mut names: Vec<String> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(records.len());
    let mut features = Array2::<f64>::zeros((records.len(), feature_cols.len()));

    for (r, (line, rec)) in records.iter().enumerate() {
        let row = *line as usize;
        if rec.len() != width {
            return Err(Error::Parse {
                row,
                column: "-".into(),
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let label = &rec[label_col];
        if label.is_empty() {
            return Err(Error::MissingLabel { row });
        }
        let class = *lookup.entry(label.to_string()).or_insert_with(|| {
            names.push(label.to_string());
            names.len() - 1
        });
        labels.push(class);

        for (j, &c) in feature_cols.iter().enumerate() {
            let cell = &rec[c];
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumericFeature {
                    row,
                    column: headers[c].clone(),
                    value: cell.to_string(),
                })?;
            features[[r, j]] = value;
        }
    }

    if names.is_empty() {
        return Err(Error::InvalidSpec(format!("{} has no data rows", schema.path.display())));
    }
    Dataset::with_class_names(features, labels, names)
}
