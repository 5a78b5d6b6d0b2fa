use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use clap::ValueEnum;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::run::{Provenance, ResultEnvelope};
use super::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.14e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn from_csv(field: &str) -> Cell {
        if let Ok(i) = field.parse::<i64>() {
            return Cell::Int(i);
        }
        if let Ok(x) = field.parse::<f64>() {
            return Cell::Float(x);
        }
        match field {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => Cell::Text(field.to_string()),
        }
    }
}

/// Column names and rows of cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::to_csv).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    fn to_records(&self) -> Vec<IndexMap<String, Cell>> {
        self.rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .cloned()
                    .zip(row.iter().cloned())
                    .collect()
            })
            .collect()
    }
}

/// The JSON form of an envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub config: RunConfig,
    pub provenance: Provenance,
    pub rows: Vec<IndexMap<String, Cell>>,
}

impl JsonDocument {
    pub fn table(&self) -> Table {
        let columns: Vec<String> = self
            .rows
            .first()
            .map(|r| r.keys().cloned().collect())
            .unwrap_or_default();
        let rows = self
            .rows
            .iter()
            .map(|r| r.values().cloned().collect())
            .collect();
        Table { columns, rows }
    }
}

pub fn render(envelope: &ResultEnvelope, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(envelope.table.to_csv()),
        Format::Json => {
            let doc = JsonDocument {
                config: envelope.config.clone(),
                provenance: envelope.provenance.clone(),
                rows: envelope.table.to_records(),
            };
            let mut s =
                serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes the envelope to `path`, or to stdout when `path` is `None`.
pub fn emit(envelope: &ResultEnvelope, format: Format, path: Option<&Path>) -> Result<()> {
    let text = render(envelope, format)?;
    match path {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Table> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let row: Vec<Cell> = line.split(',').map(Cell::from_csv).collect();
        if row.len() != table.columns.len() {
            return Err(Error::Parse(format!(
                "CSV line {} has {} fields, expected {}",
                i + 2,
                row.len(),
                table.columns.len()
            )));
        }
        table.rows.push(row);
    }
    Ok(table)
}

pub fn read_json(text: &str) -> Result<JsonDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["N", "value", "ok", "label"]);
        t.push(vec![
            Cell::Int(16),
            Cell::Float(0.1),
            Cell::Bool(true),
            Cell::Text("a".into()),
        ]);
        t.push(vec![
            Cell::Int(32),
            Cell::Float(-2.5e-12),
            Cell::Bool(false),
            Cell::Text(String::new()),
        ]);
        t
    }

    #[test]
    fn csv_shape() {
        let empty = Table::new(["a", "b"]);
        assert_eq!(empty.to_csv(), "a,b\n");
        let mut one = Table::new(["x"]);
        one.push(vec![Cell::Float(1.0)]);
        assert_eq!(one.to_csv(), "x\n1.00000000000000e0\n");
        assert_eq!(one.to_csv().lines().count(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let back = read_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn fifteen_digits() {
        let x = std::f64::consts::PI;
        let s = Cell::Float(x).to_csv();
        assert_eq!(s, "3.14159265358979e0");
        let y: f64 = s.parse().unwrap();
        assert!((y - x).abs() / x < 1e-14);
    }

    #[test]
    fn ragged_csv_is_rejected() {
        assert!(read_csv("a,b\n1\n").is_err());
        assert!(read_csv("").is_err());
    }
}
