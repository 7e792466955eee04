use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::args::{Format, RunConfig};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    /// Numbers carry 17 significant digits.
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "pass" } else { "fail" }.to_string())
    }
}

/// Result of one subcommand: a table plus provenance details.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub inputs: Map<String, Value>,
    pub tolerances: Map<String, Value>,
    pub truncations: Vec<Value>,
    pub diagnostics: Map<String, Value>,
    pub svg: Option<String>,
    /// Set when a consistency check failed; the outputs are still written.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Default::default()
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) {
        self.inputs.insert(key.into(), value.into());
    }

    pub fn tolerance(&mut self, key: &str, value: f64) {
        self.tolerances.insert(key.into(), json!(value));
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.into(), value.into());
    }

    pub fn csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
                .collect(),
        )
    }

    pub fn provenance(&self, config: &RunConfig) -> Value {
        json!({
            "schema": SCHEMA,
            "tool": "zzi",
            "version": env!("CARGO_PKG_VERSION"),
            "command": config.command.name(),
            "config": serde_json::to_value(config).expect("config serializes"),
            "inputs": self.inputs,
            "tolerances": self.tolerances,
            "truncations": self.truncations,
            "diagnostics": self.diagnostics,
            "status": if self.failure.is_some() { "fail" } else { "ok" },
            "failure": self.failure,
        })
    }

    pub fn document(&self, config: &RunConfig) -> Value {
        json!({
            "schema": SCHEMA,
            "columns": self.columns,
            "rows": self.rows_json(),
            "provenance": self.provenance(config),
        })
    }
}

fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("json serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes the primary output (and sidecars when `--out` is given).
/// Returns the paths written.
pub fn emit(report: &Report, config: &RunConfig, stdout: &mut dyn Write) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match (&config.out, config.format) {
        (None, Format::Csv) => stdout.write_all(&report.csv())?,
        (None, Format::Json) => stdout.write_all(&pretty(&report.document(config)))?,
        (Some(stem), format) => {
            if let Some(parent) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            let json_path = with_extension(stem, "json");
            if format == Format::Csv {
                let csv_path = with_extension(stem, "csv");
                std::fs::write(&csv_path, report.csv())?;
                written.push(csv_path);
                std::fs::write(&json_path, pretty(&report.provenance(config)))?;
            } else {
                std::fs::write(&json_path, pretty(&report.document(config)))?;
            }
            written.push(json_path);
            if let Some(svg) = &report.svg {
                let svg_path = with_extension(stem, "svg");
                std::fs::write(&svg_path, svg)?;
                written.push(svg_path);
            }
        }
    }
    Ok(written)
}
