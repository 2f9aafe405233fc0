//! Plot-ready CSV and JSON emission.
//!
//! CSV files carry a header row, UTF-8 text, LF line endings and floats at
//! full precision (17 significant digits). Given the same configuration the
//! bytes are identical across runs; nothing time- or host-dependent is
//! written.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Environment variable naming the default directory for relative output
/// paths.
pub const OUTPUT_DIR_ENV: &str = "STAR_MORAN_OUTPUT_DIR";

/// 17 significant digits, round-trip safe.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub enum CsvValue {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl CsvValue {
    fn render(&self) -> String {
        match self {
            CsvValue::Int(v) => v.to_string(),
            CsvValue::Float(v) => fmt_float(*v),
            CsvValue::Text(s) => s.clone(),
            CsvValue::Empty => String::new(),
        }
    }
}

pub fn csv_document(header: &[&str], rows: &[Vec<CsvValue>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cells: Vec<String> = row.iter().map(CsvValue::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Applies the output-directory environment variable to relative paths.
pub fn resolve_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes to the resolved path, or to stdout when no path was given.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Config(format!("failed to write stdout: {e}")))
        }
        Some(p) => {
            let resolved = resolve_path(p);
            if let Some(parent) = resolved.parent() {
                if !parent.as_os_str().is_empty() && !parent.exists() {
                    std::fs::create_dir_all(parent).map_err(|e| {
                        CliError::Config(format!("cannot create {}: {e}", parent.display()))
                    })?;
                }
            }
            std::fs::write(&resolved, content)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", resolved.display())))
        }
    }
}

pub fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable output");
    s.push('\n');
    s
}
