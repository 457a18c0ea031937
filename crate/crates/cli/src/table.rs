//! Result tables and their CSV / JSON encodings.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

/// Written in place of a value that diverges at `G = 1`.
pub const BOUNDARY_TOKEN: &str = "inf-at-boundary";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Boundary,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Self::Num(x) => format_number(*x),
            Self::Text(s) => s.clone(),
            Self::Boundary => BOUNDARY_TOKEN.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Self::Num(x) => {
                let r = round_significant(*x);
                serde_json::Number::from_f64(r)
                    .map_or_else(|| Value::String(format_number(r)), Value::Number)
            }
            Self::Text(s) => Value::String(s.clone()),
            Self::Boundary => Value::String(BOUNDARY_TOKEN.to_string()),
        }
    }
}

/// Rounds to 12 significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest decimal that round-trips the 12-significant-digit value.
pub fn format_number(x: f64) -> String {
    let r = round_significant(x);
    if !r.is_finite() {
        return if r.is_nan() {
            "nan".into()
        } else if r > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = r.abs();
    if r == 0.0 {
        "0".into()
    } else if (1e-5..1e16).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn boundary_cells(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .filter(|c| **c == Cell::Boundary)
            .count()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)
            .map_err(|e| CliError::Encode(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| CliError::Encode(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Encode(e.to_string()))
    }

    /// Columns as `[{ "name": ..., "values": [...] }, ...]`.
    pub fn to_json_value(&self) -> Value {
        let cols: Vec<Value> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, name)| {
                json!({
                    "name": name,
                    "values": self.rows.iter().map(|r| r[i].to_json()).collect::<Vec<_>>(),
                })
            })
            .collect();
        Value::Array(cols)
    }
}

/// What a command produced: its table and a summary for the metadata block.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub table: Table,
    pub warnings: usize,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, table: Table) -> Self {
        let warnings = table.boundary_cells();
        Self {
            command,
            table,
            warnings,
            summary: Map::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("summary value serializes"),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(25.0 / 6.0), "4.16666666667");
        assert_eq!(format_number(7.5), "7.5");
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0 / 3.0 * 1e-9), "3.33333333333e-10");
        assert_eq!(format_number(123456789012345.0), "123456789012000");
        assert_eq!(format_number(2.5e20), "2.5e20");
    }

    #[test]
    fn csv_and_json_layout() {
        let mut t = Table::new(&["G", "note"]);
        t.rows.push(vec![Cell::Num(1.0), Cell::Boundary]);
        t.rows.push(vec![Cell::Num(2.5), Cell::Text("a,b".into())]);
        let csv = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(csv, "G,note\n1,inf-at-boundary\n2.5,\"a,b\"\n");
        assert_eq!(t.boundary_cells(), 1);
        let js = t.to_json_value();
        assert_eq!(js[0]["name"], "G");
        assert_eq!(js[0]["values"][1], 2.5);
        assert_eq!(js[1]["values"][0], BOUNDARY_TOKEN);
    }
}
