// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // Debug formatting is the shortest representation that parses
            // back to the same f64.
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("row {row} has {found} cells, header has {expected}")]
    Width { row: usize, expected: usize, found: usize },
    #[error("malformed metadata line `{0}`")]
    Metadata(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Numeric result rows under a fixed header, preceded by `# key=value`
/// metadata lines.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(metadata: Metadata, columns: &[&str]) -> Self {
        ResultTable {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), TableError> {
        if row.len() != self.columns.len() {
            return Err(TableError::Width {
                row: self.rows.len(),
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Numeric values of column `name`; text cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[k] {
                    Cell::Int(v) => *v as f64,
                    Cell::Float(v) => *v,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    /// Raw cells of column `name`.
    pub fn cells(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), TableError> {
        let m = &self.metadata;
        writeln!(out, "# version={}", m.version)?;
        writeln!(out, "# kind={}", m.kind)?;
        writeln!(out, "# seed={}", m.seed)?;
        writeln!(out, "# config_hash={}", m.config_hash)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, TableError> {
        let mut meta_lines = Vec::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            match line.strip_prefix("# ") {
                Some(rest) if body.is_empty() => meta_lines.push(rest.to_string()),
                _ => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let field = |key: &str| {
            meta_lines
                .iter()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(|| TableError::Metadata(key.to_string()))
        };
        let metadata = Metadata {
            version: field("version")?,
            kind: field("kind")?,
            seed: field("seed")?
                .parse()
                .map_err(|_| TableError::Metadata("seed".into()))?,
            config_hash: field("config_hash")?,
        };
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let columns: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut table = ResultTable {
            metadata,
            columns,
            rows: Vec::new(),
        };
        for rec in reader.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    if let Ok(v) = s.parse::<i64>() {
                        Cell::Int(v)
                    } else if let Ok(v) = s.parse::<f64>() {
                        Cell::Float(v)
                    } else {
                        Cell::Text(s.to_string())
                    }
                })
                .collect();
            table.push(row)?;
        }
        Ok(table)
    }
}
