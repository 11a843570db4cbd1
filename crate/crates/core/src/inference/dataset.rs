//! Complete tabular data: one column per variable, one row per sample.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::model::{Cell, Domain, Variable};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: missing value for `{column}`")]
    MissingCell { row: usize, column: String },
    #[error("row {row}: `{value}` is not valid for `{column}`")]
    InvalidCell { row: usize, column: String, value: String },
    #[error("column `{0}` is not in the schema")]
    UnknownColumn(String),
    #[error("column `{0}` appears twice")]
    DuplicateColumn(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth { row: usize, found: usize, expected: usize },
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::Csv(_) => "csv",
            DatasetError::Io(_) => "io",
            DatasetError::MissingCell { .. } => "missing_cell",
            DatasetError::InvalidCell { .. } => "invalid_cell",
            DatasetError::UnknownColumn(_) => "unknown_column",
            DatasetError::DuplicateColumn(_) => "duplicate_column",
            DatasetError::RowWidth { .. } => "row_width",
        }
    }
}

/// Rows of complete assignments. Every cell matches its column's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    variables: Vec<Variable>,
    rows: Vec<Vec<Cell>>,
}

impl Dataset {
    pub fn new(variables: Vec<Variable>, rows: Vec<Vec<Cell>>) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        for v in &variables {
            if !seen.insert(&v.name) {
                return Err(DatasetError::DuplicateColumn(v.name.clone()));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return Err(DatasetError::RowWidth { row: r + 1, found: row.len(), expected: variables.len() });
            }
            for (cell, v) in row.iter().zip(&variables) {
                let ok = match (cell, &v.domain) {
                    (Cell::State(s), Domain::Discrete(states)) => *s < states.len(),
                    (Cell::Real(x), Domain::Continuous) => x.is_finite(),
                    _ => false,
                };
                if !ok {
                    return Err(DatasetError::InvalidCell { row: r + 1, column: v.name.clone(), value: format!("{cell:?}") });
                }
            }
        }
        Ok(Dataset { variables, rows })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Fraction of rows where `column` is `state`.
    pub fn frequency(&self, column: &str, state: &str) -> Option<f64> {
        let c = self.column_index(column)?;
        let s = self.variables[c].domain.states()?.iter().position(|x| x == state)?;
        let hits = self.rows.iter().filter(|r| r[c] == Cell::State(s)).count();
        Some(hits as f64 / self.rows.len() as f64)
    }

    /// Sample mean of a continuous column.
    pub fn mean(&self, column: &str) -> Option<f64> {
        let c = self.column_index(column)?;
        if self.variables[c].domain.is_discrete() {
            return None;
        }
        Some(self.rows.iter().map(|r| r[c].real()).sum::<f64>() / self.rows.len() as f64)
    }

    /// Reads CSV with a header row of variable names. With a schema, columns
    /// take the schema's domains; without one, all-numeric columns are
    /// continuous and the rest discrete with sorted state names.
    pub fn read_csv<R: Read>(reader: R, schema: Option<&[Variable]>) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
        let mut raw: Vec<Vec<String>> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            raw.push(record.iter().map(String::from).collect());
        }
        for (r, row) in raw.iter().enumerate() {
            if row.len() != header.len() {
                return Err(DatasetError::RowWidth { row: r + 1, found: row.len(), expected: header.len() });
            }
            if let Some(c) = row.iter().position(|x| x.is_empty()) {
                return Err(DatasetError::MissingCell { row: r + 1, column: header[c].clone() });
            }
        }

        let variables: Vec<Variable> = match schema {
            Some(schema) => header
                .iter()
                .map(|h| {
                    schema.iter().find(|v| &v.name == h).cloned().ok_or_else(|| DatasetError::UnknownColumn(h.clone()))
                })
                .collect::<Result<_, _>>()?,
            None => header
                .iter()
                .enumerate()
                .map(|(c, h)| {
                    if !raw.is_empty() && raw.iter().all(|row| row[c].parse::<f64>().is_ok()) {
                        Variable { name: h.clone(), domain: Domain::Continuous }
                    } else {
                        let states: BTreeSet<&str> = raw.iter().map(|row| row[c].as_str()).collect();
                        Variable { name: h.clone(), domain: Domain::Discrete(states.into_iter().map(String::from).collect()) }
                    }
                })
                .collect(),
        };

        let mut rows = Vec::with_capacity(raw.len());
        for (r, row) in raw.iter().enumerate() {
            let cells = row
                .iter()
                .zip(&variables)
                .map(|(text, v)| {
                    let cell = match &v.domain {
                        Domain::Discrete(states) => states.iter().position(|s| s == text).map(Cell::State),
                        Domain::Continuous => text.parse::<f64>().ok().filter(|x| x.is_finite()).map(Cell::Real),
                    };
                    cell.ok_or_else(|| DatasetError::InvalidCell { row: r + 1, column: v.name.clone(), value: text.clone() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(cells);
        }
        Dataset::new(variables, rows)
    }

    pub fn read_csv_path(path: &Path, schema: Option<&[Variable]>) -> Result<Self, DatasetError> {
        Self::read_csv(std::fs::File::open(path)?, schema)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.variables.iter().map(|v| v.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().zip(&self.variables).map(|(cell, v)| match cell {
                Cell::State(s) => v.domain.states().unwrap()[*s].clone(),
                Cell::Real(x) => format!("{x:?}"),
            }))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}
