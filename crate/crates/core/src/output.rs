//! Tabular output shared by the command-line tools: `#`-prefixed metadata
//! lines followed by a CSV body, or the same content as a JSON object.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = env!("CARGO_PKG_NAME");

/// Shortest representation that parses back to the same `f64`.
///
/// Plain decimal notation in the comfortable range, exponent notation
/// outside it, so tiny matrix elements do not turn into long zero runs.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // -0.0 included
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => fmt_f64(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) if v.is_finite() => json!(v),
            // JSON has no NaN or infinity
            Cell::Real(_) => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
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

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Ordered key/value echo of everything that determined a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.push("tool", TOOL);
        m.push("version", VERSION);
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Reads a metadata block back from `# key = value` lines.
    pub fn parse_header(text: &str) -> Self {
        let entries = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| {
                let (k, v) = l.trim_start_matches('#').split_once('=')?;
                Some((k.trim().to_string(), v.trim().to_string()))
            })
            .collect();
        Self { entries }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(metadata: Metadata, columns: &[&str]) -> Self {
        Self {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("table serializes");
                s.push('\n');
                s
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.metadata.entries() {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut meta = Map::new();
        for (k, v) in self.metadata.entries() {
            meta.insert(k.clone(), json!(v));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        json!({
            "metadata": meta,
            "columns": self.columns,
            "rows": rows,
        })
    }
}
