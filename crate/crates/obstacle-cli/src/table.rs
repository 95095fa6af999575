//! CSV and manifest writers. Floats are written with Rust's shortest
//! round-trip formatting so reruns are byte-identical; wall-clock values are
//! never part of an artifact.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::RunError;

pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    /// Absent diagnostics render as `nan`.
    Missing,
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(x) => Cell::Float(x),
            None => Cell::Missing,
        }
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format!("{v}"),
        Cell::Text(v) => v.clone(),
        Cell::Bool(v) => v.to_string(),
        Cell::Missing => "nan".to_string(),
    }
}

/// Write a CSV with a `#` preamble explaining each column (meaning and unit)
/// followed by the header row and data rows.
pub fn write_csv(
    path: &Path,
    column_notes: &[&str],
    header: &[&str],
    rows: &[Vec<Cell>],
) -> Result<(), RunError> {
    let file = std::fs::File::create(path)
        .map_err(|e| RunError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    let io = |e: std::io::Error| RunError::Io(e.to_string());
    for note in column_notes {
        writeln!(out, "# {note}").map_err(io)?;
    }
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let line: Vec<String> = row.iter().map(render).collect();
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    Ok(())
}

/// Machine-readable run manifest in the same flat `key = value` shape as the
/// configs.
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(preset: &str, seed: u64) -> Self {
        let mut m = Self { lines: Vec::new() };
        m.put("preset", preset);
        m.put("seed", &seed.to_string());
        m
    }

    pub fn put(&mut self, key: &str, value: &str) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn put_f64(&mut self, key: &str, value: f64) {
        self.put(key, &format!("{value}"));
    }

    pub fn put_check(&mut self, name: &str, pass: bool) {
        self.put(&format!("check.{name}"), if pass { "pass" } else { "fail" });
    }

    pub fn finish(mut self, dir: &Path, failed: Option<&str>) -> Result<(), RunError> {
        match failed {
            None => self.put("status", "ok"),
            Some(reason) => {
                self.put("status", "failed");
                self.put("reason", reason);
            }
        }
        let path = dir.join("manifest.txt");
        let body: String =
            self.lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        std::fs::write(&path, body)
            .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
    }
}
