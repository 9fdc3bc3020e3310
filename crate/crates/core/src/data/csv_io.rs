//! CSV reading and writing.
//!
//! The dialect is deliberately small: comma-separated numeric cells,
//! an optional single header row, no missing values.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// How the target column is selected from the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl TargetColumn {
    /// Parses a CLI-style selector: a nonnegative integer is treated as
    /// an index, anything else as a column name.
    pub fn parse(s: &str) -> TargetColumn {
        match s.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.to_string()),
        }
    }

    fn describe(&self) -> String {
        match self {
            TargetColumn::Name(n) => n.clone(),
            TargetColumn::Index(i) => i.to_string(),
        }
    }
}

/// Loads a CSV file, splitting off one column as the targets and keeping
/// the remaining columns as inputs in file order.
///
/// The first row is treated as a header when any of its cells fails to
/// parse as a number. Cell errors report 1-based row and column
/// positions as they appear in the file.
pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_open_error(path, e))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptyTable {
            path: path.to_path_buf(),
        });
    }

    let width = records[0].len();
    let header: Option<Vec<String>> =
        if records[0].iter().any(|cell| cell.parse::<f64>().is_err()) {
            Some(records[0].iter().map(|c| c.to_string()).collect())
        } else {
            None
        };
    let first_data_row = usize::from(header.is_some());
    if records.len() == first_data_row {
        return Err(Error::EmptyTable {
            path: path.to_path_buf(),
        });
    }

    let target_index = match target {
        TargetColumn::Index(i) if *i < width => *i,
        TargetColumn::Name(name) => {
            let found = header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name));
            match found {
                Some(i) => i,
                None => {
                    return Err(Error::UnknownTargetColumn {
                        path: path.to_path_buf(),
                        target: target.describe(),
                    })
                }
            }
        }
        _ => {
            return Err(Error::UnknownTargetColumn {
                path: path.to_path_buf(),
                target: target.describe(),
            })
        }
    };
    if width < 2 {
        return Err(Error::invalid(format!(
            "{}: need at least one feature column besides the target",
            path.display()
        )));
    }

    let n = records.len() - first_data_row;
    let dims = width - 1;
    let mut inputs = DMatrix::zeros(n, dims);
    let mut targets = DVector::zeros(n);
    for (i, record) in records[first_data_row..].iter().enumerate() {
        if record.len() != width {
            return Err(Error::invalid(format!(
                "{}: row {} has {} cells, expected {width}",
                path.display(),
                i + first_data_row + 1,
                record.len()
            )));
        }
        let mut feature = 0usize;
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                path: path.to_path_buf(),
                row: i + first_data_row + 1,
                column: j + 1,
                value: cell.to_string(),
            })?;
            if j == target_index {
                targets[i] = value;
            } else {
                inputs[(i, feature)] = value;
                feature += 1;
            }
        }
    }

    let column_names = header.map(|h| {
        let mut names: Vec<String> = h
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != target_index)
            .map(|(_, c)| c.clone())
            .collect();
        names.push(h[target_index].clone());
        names
    });
    Dataset::new(inputs, targets, column_names)
}

fn csv_open_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io {
            path: path.to_path_buf(),
            source: io,
        },
        other => Error::invalid(format!("{}: {other:?}", path.display())),
    }
}

/// Writes a dataset back out with a header row; the target column goes
/// last. Values use the shortest representation that round-trips.
pub fn write_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let names: Vec<String> = match data.column_names() {
        Some(names) => names.to_vec(),
        None => {
            let mut names: Vec<String> =
                (1..=data.dims()).map(|d| format!("x{d}")).collect();
            names.push("y".to_string());
            names
        }
    };
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..data.len() {
        for j in 0..data.dims() {
            out.push_str(&format!("{},", data.inputs()[(i, j)]));
        }
        out.push_str(&format!("{}\n", data.targets()[i]));
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
