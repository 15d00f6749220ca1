//! JSON run reports and CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

/// One reported number or object, tagged with the operation that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Tagged {
    pub name: String,
    pub op: String,
    pub value: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub results: Vec<Tagged>,
    pub provenance: Vec<String>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            results: Vec::new(),
            provenance: Vec::new(),
            warnings: Vec::new(),
            files: Vec::new(),
            timing: None,
        }
    }

    pub fn put(&mut self, name: &str, op: &str, value: impl Serialize) {
        self.results.push(Tagged {
            name: name.to_string(),
            op: op.to_string(),
            value: serde_json::to_value(value).unwrap_or(Value::Null),
        });
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.provenance.push(line.into());
    }

    pub fn warn(&mut self, line: impl Into<String>) {
        self.warnings.push(line.into());
    }

    pub fn randomized(&mut self, what: &str, seed: u64, trials: usize) {
        self.note(format!("{what}: seed {seed}, {trials} trials"));
    }
}

/// Output directory plus the list of files written, in order.
pub struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)
                .map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn finish(mut self, mut report: RunReport) -> Result<RunReport, CliError> {
        report.files = self.written.clone();
        report.files.push("report.json".into());
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Io(format!("report.json: {e}")))?;
        text.push('\n');
        self.write("report.json", text.as_bytes())?;
        Ok(report)
    }
}

/// `{ "value": v, "lower_bound": true }` style wrapper for estimates.
pub fn estimate(value: f64, seed: u64, trials: usize, lower_bound: bool) -> Value {
    json!({ "value": value, "seed": seed, "trials": trials, "lower_bound": lower_bound })
}
