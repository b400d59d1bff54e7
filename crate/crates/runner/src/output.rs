//! Tabular results, CSV/JSON writers and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// A named table with a fixed column schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    #[serde(skip)]
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of one numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        self.rows.iter().map(|r| r[idx].as_f64()).collect()
    }

    pub fn to_csv(&self) -> Result<String, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| RunError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| RunError::Output(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, RunError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| RunError::Output(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

fn csv_err(e: csv::Error) -> RunError {
    RunError::Output(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Everything a scenario produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub scenario: String,
    pub tables: Vec<Table>,
    /// Solved quantities recorded in the manifest, in insertion order.
    pub solved: Vec<(String, String)>,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every table plus a `manifest` file and returns the written paths.
pub fn write_run(
    dir: &Path,
    format: Format,
    output: &RunOutput,
    config_text: &str,
    seed: u64,
) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut written = Vec::new();
    let mut digests = Vec::new();
    for table in &output.tables {
        let body = match format {
            Format::Csv => table.to_csv()?,
            Format::Json => table.to_json()?,
        };
        let file = format!("{}.{}", table.name, format.extension());
        let path = dir.join(&file);
        fs::write(&path, &body).map_err(|e| RunError::io(&path, e))?;
        digests.push((file, sha256_hex(body.as_bytes())));
        written.push(path);
    }
    let manifest = render_manifest(output, config_text, seed, &digests);
    let path = dir.join("manifest");
    fs::write(&path, manifest).map_err(|e| RunError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

pub fn render_manifest(output: &RunOutput, config_text: &str, seed: u64, digests: &[(String, String)]) -> String {
    let mut m = String::new();
    m.push_str(&format!("tool = updown {}\n", env!("CARGO_PKG_VERSION")));
    m.push_str(&format!("scenario = {}\n", output.scenario));
    m.push_str(&format!("seed = {seed}\n"));
    m.push_str(&format!("config_sha256 = {}\n", sha256_hex(config_text.as_bytes())));
    if !output.solved.is_empty() {
        m.push_str("\n[solved]\n");
        for (k, v) in &output.solved {
            m.push_str(&format!("{k} = {v}\n"));
        }
    }
    m.push_str("\n[files]\n");
    for (file, digest) in digests {
        m.push_str(&format!("{file} = {digest}\n"));
    }
    m
}
