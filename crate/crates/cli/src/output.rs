//! CSV tables, run metadata and atomic output writing.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use darkcool::model::SimulationConfig;
use serde::{Deserialize, Serialize};

/// Floats carry 17 significant digits so values survive a text round trip.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width of {}", self.name);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: SimulationConfig,
    /// Command-specific arguments (sweep spec, state index, ...).
    pub parameters: serde_json::Value,
    pub datasets: Vec<DatasetInfo>,
}

/// Everything one command writes.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub metadata: Metadata,
    pub tables: Vec<Table>,
}

impl OutputBundle {
    pub fn new(
        command: &str,
        config: &SimulationConfig,
        parameters: serde_json::Value,
        tables: Vec<Table>,
    ) -> Self {
        let datasets = tables
            .iter()
            .map(|t| DatasetInfo { file: format!("{}.csv", t.name), rows: t.len() })
            .collect();
        let metadata = Metadata {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.rng_seed,
            config: config.resolved(),
            parameters,
            datasets,
        };
        OutputBundle { metadata, tables }
    }

    /// Writes every file into a scratch directory inside `dir`, then renames
    /// them into place, so a failure never leaves a partial file behind.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let scratch = tempfile::Builder::new().prefix(".darkcool-").tempdir_in(dir)?;
        let mut files = Vec::with_capacity(self.tables.len() + 1);
        for table in &self.tables {
            files.push((format!("{}.csv", table.name), table.to_csv()));
        }
        let mut meta = serde_json::to_string_pretty(&self.metadata).map_err(io::Error::other)?;
        meta.push('\n');
        files.push(("metadata.json".to_string(), meta));
        for (name, contents) in &files {
            let mut file = fs::File::create(scratch.path().join(name))?;
            file.write_all(contents.as_bytes())?;
            file.sync_all()?;
        }
        for (name, _) in &files {
            fs::rename(scratch.path().join(name), dir.join(name))?;
        }
        Ok(())
    }
}

/// Machine-readable error line for stderr.
pub fn error_json(kind: &str, message: &str) -> String {
    let mut out = String::new();
    let value = serde_json::json!({ "error": kind, "message": message });
    write!(out, "{value}").expect("string write");
    out
}
