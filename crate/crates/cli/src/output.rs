use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(u64),
    Num(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match *self {
            Cell::Int(k) => k.to_string(),
            Cell::Num(x) => format!("{x:.16e}"),
        }
    }

    fn pretty(&self) -> String {
        match *self {
            Cell::Int(k) => k.to_string(),
            Cell::Num(x) if x.abs() >= 1e7 || (x != 0.0 && x.abs() < 1e-4) => format!("{x:.6e}"),
            Cell::Num(x) => format!("{x:.6}"),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Int(k) => json!(k),
            Cell::Num(x) => json!(x),
        }
    }
}

/// Rows of numbers with named columns, rendered in any [`Format`].
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra fields for the JSON envelope.
    pub meta: Value,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            command,
            columns,
            rows: Vec::new(),
            meta: Value::Null,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Vec<Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
                let mut doc = json!({
                    "schema_version": OUTPUT_SCHEMA_VERSION,
                    "command": self.command,
                    "columns": self.columns,
                    "rows": rows,
                });
                if let Value::Object(extra) = &self.meta {
                    for (k, v) in extra {
                        doc[k] = v.clone();
                    }
                }
                let mut s = serde_json::to_string_pretty(&doc).expect("plain JSON values");
                s.push('\n');
                s
            }
            Format::Table => {
                let text: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::pretty).collect()).collect();
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|j| {
                        text.iter()
                            .map(|r| r[j].len())
                            .chain([self.columns[j].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let mut out = String::new();
                let line = |cells: &[&str], out: &mut String| {
                    let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                    let _ = writeln!(out, "{}", padded.join("  ").trim_end());
                };
                line(&self.columns, &mut out);
                for r in &text {
                    let refs: Vec<&str> = r.iter().map(String::as_str).collect();
                    line(&refs, &mut out);
                }
                out
            }
        }
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
