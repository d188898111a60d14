//! Trace CSV and summary JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bounds::{BoundCheck, Constants};
use crate::config::ExperimentConfig;
use crate::error::Result;

pub const TRACE_HEADER: &str =
    "run_id,solver,stage_or_outer_index,sigma_or_l,grad_evals_cum,grad_norm,f_value,wall_ns";

/// One trace line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub run_id: String,
    pub solver: String,
    pub index: u64,
    pub parameter: f64,
    pub grad_evals: u64,
    pub grad_norm: Option<f64>,
    pub f_value: Option<f64>,
    pub wall_ns: u64,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trace_csv(rows: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.run_id,
            r.solver,
            r.index,
            r.parameter,
            r.grad_evals,
            opt(r.grad_norm),
            opt(r.f_value),
            r.wall_ns
        );
    }
    out
}

/// SHA-256 of the point's little-endian `f64` bytes, hex encoded.
pub fn point_digest(x: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in x {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Outcome of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub seed: u64,
    pub point_digest: String,
    pub point_norm: f64,
    /// `|grad f|`, or the projected-gradient norm on constrained problems.
    pub grad_norm: f64,
    pub f_value: Option<f64>,
    pub gradient_evals: u64,
    pub value_evals: u64,
    pub wall_ns: u64,
    /// The solver's own success flag.
    pub converged: bool,
    pub checks: Vec<BoundCheck>,
    /// Solver-specific observations (final `M`, `mu`, `l`, rounds, ...).
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl RunSummary {
    pub fn success(&self) -> bool {
        self.converged && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub solver: String,
    pub epsilon: f64,
    pub config: ExperimentConfig,
    pub constants: Constants,
    pub runs: Vec<RunSummary>,
    pub success: bool,
}

/// Paths written for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub trace: PathBuf,
    pub summary: PathBuf,
}

pub fn write_experiment(
    dir: &Path,
    stem: &str,
    summary: &ExperimentSummary,
    trace: &[TraceRecord],
) -> Result<Written> {
    fs::create_dir_all(dir)?;
    let trace_path = dir.join(format!("{stem}.trace.csv"));
    fs::write(&trace_path, trace_csv(trace))?;
    let summary_path = dir.join(format!("{stem}.summary.json"));
    let mut json = serde_json::to_string_pretty(summary).map_err(std::io::Error::other)?;
    json.push('\n');
    fs::write(&summary_path, json)?;
    Ok(Written {
        trace: trace_path,
        summary: summary_path,
    })
}
