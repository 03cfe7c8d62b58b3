//! JSON documents written by the commands. Every document carries the
//! manifest of the run that produced it; wall-clock fields appear only when
//! `--timings` was requested so that reruns are byte-identical otherwise.

use std::collections::BTreeMap;
use std::path::Path;

use ladcd::{FitReport, OracleSolution};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Arguments after the program name, verbatim.
    pub args: Vec<String>,
    /// Fully resolved configuration, defaults included.
    pub config: Value,
    pub seed: u64,
    pub version: String,
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl Manifest {
    pub fn new(command: &str, config: Value, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: BTreeMap::new(),
            timings: None,
        }
    }

    pub fn output(&mut self, role: &str, path: &Path) {
        self.outputs.insert(role.to_string(), path.display().to_string());
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSummary {
    pub path: String,
    pub n: usize,
    pub p: usize,
    pub response: String,
    pub columns: Vec<String>,
    pub dropped_rows: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSection {
    pub beta: Vec<f64>,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub train_mae: f64,
    pub objective_trace: Vec<f64>,
    pub sweeps_used: usize,
    pub converged: bool,
    pub escapes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDocument {
    pub schema_version: u32,
    pub init_method: String,
    pub init_objective: f64,
    pub fit: FitSection,
    pub metrics: BTreeMap<String, f64>,
    pub data: DataSummary,
    pub manifest: Manifest,
}

impl FitDocument {
    pub fn new(report: &FitReport, data: DataSummary, manifest: Manifest) -> Self {
        let f = &report.fit;
        Self {
            schema_version: SCHEMA_VERSION,
            init_method: report.init_method.as_str().to_string(),
            init_objective: report.init_objective,
            fit: FitSection {
                beta: f.beta.to_vec(),
                initial_objective: f.initial_objective,
                final_objective: f.final_objective,
                train_mae: f.train_mae(),
                objective_trace: f.objective_trace.clone(),
                sweeps_used: f.sweeps_used,
                converged: f.converged,
                escapes: f.escapes,
            },
            metrics: report.metrics.clone(),
            data,
            manifest,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleDocument {
    pub schema_version: u32,
    pub beta: Vec<f64>,
    pub objective: f64,
    pub support: Vec<usize>,
    pub unique: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckOutcome>,
    pub data: DataSummary,
    pub manifest: Manifest,
}

impl OracleDocument {
    pub fn new(sol: &OracleSolution, data: DataSummary, manifest: Manifest) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            beta: sol.beta.to_vec(),
            objective: sol.objective,
            support: sol.support.clone(),
            unique: sol.unique,
            check: None,
            data,
            manifest,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub report: String,
    pub reported_objective: f64,
    pub relative_gap: f64,
    pub rtol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateDocument {
    pub schema_version: u32,
    pub summary: ladcd::experiment::ReplicateSummary,
    pub manifest: Manifest,
}

/// Pretty JSON with a trailing newline, to a file or stdout.
pub fn emit<T: Serialize>(doc: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
