//! Deterministic CSV and JSON rendering of result tables.

use serde_json::{json, Map, Value};

use super::config::{Format, RunConfig};

pub const UNITS: &str = "lengths in wavelengths; shifts and rates in Gamma0; times in 1/Gamma0; intensities in arbitrary units";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra metadata echoed in the header (CSV) or the top-level object (JSON).
    pub meta: Map<String, Value>,
    /// JSON-only payload, e.g. eigenvectors.
    pub extra: Map<String, Value>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// `digits` significant digits; scientific notation below `1e−4` and at or above `1e15`.
pub fn format_float(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-4..1e15).contains(&a) {
        return format!("{:.*e}", digits - 1, v);
    }
    // exponent after rounding, so 9.99… → 10.0… gets one decimal fewer
    let sci = format!("{:.*e}", digits - 1, v);
    let exponent: i64 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

fn cell_text(c: &Cell, digits: usize) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(v) => format_float(*v, digits),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

fn cell_json(c: &Cell, digits: usize) -> Value {
    match c {
        Cell::Int(i) => json!(i),
        Cell::Float(v) if v.is_finite() => {
            json!(format_float(*v, digits).parse::<f64>().expect("formatted float parses"))
        }
        Cell::Float(v) => Value::String(format_float(*v, digits)),
        Cell::Text(s) => json!(s),
        Cell::Bool(b) => json!(b),
    }
}

pub fn render(table: &Table, config: &RunConfig) -> String {
    let digits = config.output.precision;
    match config.output.format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&format!("# {} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
            out.push_str(&format!("# units: {UNITS}\n"));
            out.push_str("# config:\n");
            for line in config.to_text().lines() {
                if line.is_empty() {
                    out.push_str("#\n");
                } else {
                    out.push_str(&format!("# {line}\n"));
                }
            }
            if !table.meta.is_empty() {
                out.push_str(&format!("# meta: {}\n", Value::Object(table.meta.clone())));
            }
            out.push_str(&table.columns.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|c| cell_text(c, digits)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(|c| cell_json(c, digits)).collect()))
                .collect();
            let mut doc = Map::new();
            doc.insert("tool".into(), json!(format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))));
            doc.insert("units".into(), json!(UNITS));
            doc.insert("config".into(), json!(config.to_text()));
            doc.insert("meta".into(), Value::Object(table.meta.clone()));
            doc.insert("columns".into(), json!(table.columns));
            doc.insert("rows".into(), Value::Array(rows));
            for (k, v) in &table.extra {
                doc.insert(k.clone(), v.clone());
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serialization");
            s.push('\n');
            s
        }
    }
}

/// Recovers the resolved config text from a CSV header.
pub fn header_config(csv: &str) -> String {
    let mut lines = csv.lines().skip_while(|l| *l != "# config:").skip(1);
    let mut out = String::new();
    for line in lines.by_ref() {
        if line.starts_with("# meta:") || !line.starts_with('#') {
            break;
        }
        out.push_str(line.strip_prefix("# ").unwrap_or(""));
        out.push('\n');
    }
    out
}
