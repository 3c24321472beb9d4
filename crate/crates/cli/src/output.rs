//! Output files and the verification report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    /// Times `f`, which returns the residual, and records it against `tolerance`.
    pub fn run(&mut self, name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64, CliError>) -> Result<(), CliError> {
        let start = Instant::now();
        let residual = f()?;
        self.checks.push(Check {
            name: name.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            runtime_s: start.elapsed().as_secs_f64(),
        });
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(&self.checks).expect("serializable checks")
    }
}

/// Writes into the configured output directory.
pub struct Sink<'a> {
    pub config: &'a RunConfig,
}

impl<'a> Sink<'a> {
    pub fn new(config: &'a RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(&config.output_dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", config.output_dir.display())))?;
        Ok(Self { config })
    }

    pub fn path(&self, stem: &str, format: Format) -> PathBuf {
        let ext = match format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        self.config.output_dir.join(format!("{stem}.{ext}"))
    }

    fn create(&self, path: &PathBuf) -> Result<BufWriter<File>, CliError> {
        File::create(path)
            .map(BufWriter::new)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// A JSON document `{config, results, checks}`.
    pub fn json(&self, stem: &str, results: Value, checks: Value) -> Result<PathBuf, CliError> {
        let path = self.path(stem, Format::Json);
        let mut w = self.create(&path)?;
        let doc = json!({ "config": self.config.to_json(), "results": results, "checks": checks });
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(path)
    }

    /// A CSV file produced by a core writer that embeds the config comment.
    pub fn csv(
        &self,
        stem: &str,
        write: impl FnOnce(&mut BufWriter<File>, &Value) -> convdiff_core::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let path = self.path(stem, Format::Csv);
        let mut w = self.create(&path)?;
        write(&mut w, &self.config.to_json()).map_err(CliError::from)?;
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(path)
    }

    /// A plain CSV table with the config comment and a header row.
    pub fn table(&self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        self.csv(stem, |w, config| {
            writeln!(w, "# config: {config}")?;
            writeln!(w, "{}", header.join(","))?;
            for r in rows {
                writeln!(w, "{}", r.join(","))?;
            }
            Ok(())
        })
    }
}
