//! CSV series written through a `.partial` file that is renamed only once
//! complete, and the versioned `summary.json` report.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

/// Rows are flushed as they are written to `<name>.partial`; [`finish`]
/// renames the file to its final name. A run that fails midway leaves the
/// flushed `.partial` file behind.
///
/// [`finish`]: CsvSeries::finish
pub struct CsvSeries {
    path: PathBuf,
    partial: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSeries {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, OutputError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut partial = path.as_os_str().to_owned();
        partial.push(".partial");
        let partial = PathBuf::from(partial);
        let file = File::create(&partial).map_err(io_err(&partial))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
        let csv_err = |source| OutputError::Csv { path: partial.clone(), source };
        writer.write_record(header).map_err(csv_err)?;
        Ok(CsvSeries { path: path.to_path_buf(), partial, writer })
    }

    /// Writes one row of numbers in shortest round-trip form.
    pub fn row(&mut self, values: &[f64]) -> Result<(), OutputError> {
        let fields: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
        self.writer.write_record(&fields).map_err(|source| OutputError::Csv { path: self.partial.clone(), source })?;
        self.writer.flush().map_err(io_err(&self.partial))
    }

    pub fn finish(mut self) -> Result<PathBuf, OutputError> {
        self.writer.flush().map_err(io_err(&self.partial))?;
        drop(self.writer);
        fs::rename(&self.partial, &self.path).map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub passed: bool,
    pub detail: String,
}

/// Machine-readable outcome of one or more experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub subcommands: Vec<String>,
    /// `"pass"` when every criterion passed (vacuously for none).
    pub status: String,
    pub criteria: BTreeMap<String, CriterionOutcome>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
}

impl Default for Summary {
    fn default() -> Self {
        Summary {
            schema_version: SCHEMA_VERSION,
            subcommands: Vec::new(),
            status: "pass".into(),
            criteria: BTreeMap::new(),
            metrics: BTreeMap::new(),
            warnings: Vec::new(),
            artifacts: Vec::new(),
        }
    }
}

impl Summary {
    pub fn for_subcommand(name: &str) -> Self {
        Summary { subcommands: vec![name.to_string()], ..Summary::default() }
    }

    pub fn criterion(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.criteria.insert(name.to_string(), CriterionOutcome { passed, detail: detail.into() });
        self.refresh_status();
    }

    pub fn metric(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metrics.insert(name.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.criteria.values().all(|c| c.passed)
    }

    fn refresh_status(&mut self) {
        self.status = if self.passed() { "pass" } else { "fail" }.into();
    }

    /// Folds another summary in; criteria and metrics of `other` are
    /// prefixed with its subcommand names.
    pub fn merge(&mut self, other: &Summary) {
        let prefix = other.subcommands.join("+");
        for (k, v) in &other.criteria {
            self.criteria.insert(format!("{prefix}.{k}"), v.clone());
        }
        for (k, v) in &other.metrics {
            self.metrics.insert(format!("{prefix}.{k}"), v.clone());
        }
        self.warnings.extend(other.warnings.iter().map(|w| format!("{prefix}: {w}")));
        self.artifacts.extend(other.artifacts.iter().cloned());
        self.subcommands.extend(other.subcommands.iter().cloned());
        self.refresh_status();
    }
}

/// Writes `summary.json` into `dir` (via a `.partial` file).
pub fn emit_report(dir: &Path, summary: &Summary) -> Result<PathBuf, OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("summary.json");
    let partial = dir.join("summary.json.partial");
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    let mut f = File::create(&partial).map_err(io_err(&partial))?;
    f.write_all(text.as_bytes()).map_err(io_err(&partial))?;
    drop(f);
    fs::rename(&partial, &path).map_err(io_err(&path))?;
    Ok(path)
}
