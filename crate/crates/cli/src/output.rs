//! CSV tables and the JSON sidecar describing them.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rows of text cells under a header. Numbers are written in shortest
/// round-trip form, with an exponent at extreme magnitudes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let wrap = |source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row).map_err(wrap)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Everything a subcommand produces.
#[derive(Debug, Default)]
pub struct Outcome {
    /// `(suffix, table)`; the file is `<name><suffix>.csv`.
    pub tables: Vec<(String, Table)>,
    pub summary: Map<String, Value>,
    pub certificates: Vec<Value>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn table(&mut self, suffix: &str, table: Table) {
        self.tables.push((suffix.to_string(), table));
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), to_value(value));
    }

    pub fn certify(&mut self, certificate: impl Serialize) {
        self.certificates.push(to_value(certificate));
    }
}

pub fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("output values serialize to JSON")
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values print");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write the tables, `<name>.json` and `<name>.timing.json` under
/// `<out>/<subcommand>/`. Returns the written data paths.
pub fn write_outputs(out: &Path, config: &RunConfig, outcome: &Outcome, elapsed: Duration) -> Result<Vec<PathBuf>, CliError> {
    let dir = out.join(config.job.subcommand().as_str());
    create_dir(&dir)?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (suffix, table) in &outcome.tables {
        let file = format!("{}{suffix}.csv", config.name);
        let path = dir.join(&file);
        table.write(&path)?;
        files.push(json!({ "file": file, "columns": table.header, "rows": table.rows.len() }));
        written.push(path);
    }
    let sidecar = json!({
        "name": config.name,
        "subcommand": config.job.subcommand().as_str(),
        "code_version": CODE_VERSION,
        "preset": config.preset,
        "config": config.to_json(),
        "outputs": files,
        "certificates": outcome.certificates,
        "summary": outcome.summary,
        "warnings": outcome.warnings,
    });
    let path = dir.join(format!("{}.json", config.name));
    write_json(&path, &sidecar)?;
    written.push(path);
    let timing = json!({ "name": config.name, "wall_time_seconds": elapsed.as_secs_f64() });
    write_json(&dir.join(format!("{}.timing.json", config.name)), &timing)?;
    Ok(written)
}
