//! Tolerance sweeps: one experiment per epsilon and a scaling table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{trace_csv, write_experiment, ExperimentSummary, TraceRecord, Written};
use crate::runner::run_experiment;

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    // A constant response is fit exactly by a flat line.
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    /// Mean gradient evaluations over repetitions.
    pub gradient_evals: f64,
    /// `evals(eps_k) / evals(eps_{k-1})`; absent on the first row.
    pub ratio: Option<f64>,
    pub success: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub name: String,
    pub solver: String,
    pub rows: Vec<SweepRow>,
    /// Evaluations against `log2(1 / epsilon)`.
    pub log_fit: LinearFit,
    /// `log(evals)` against `log(1 / epsilon)`.
    pub log_log_fit: LinearFit,
    pub success: bool,
}

impl SweepTable {
    fn new(name: &str, summaries: &[ExperimentSummary]) -> Self {
        let mut rows: Vec<SweepRow> = Vec::with_capacity(summaries.len());
        for s in summaries {
            let evals =
                s.runs.iter().map(|r| r.gradient_evals as f64).sum::<f64>() / s.runs.len() as f64;
            let ratio = rows.last().map(|p| evals / p.gradient_evals);
            rows.push(SweepRow {
                epsilon: s.epsilon,
                gradient_evals: evals,
                ratio,
                success: s.success,
            });
        }
        let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r.epsilon).collect();
        let evals: Vec<f64> = rows.iter().map(|r| r.gradient_evals).collect();
        let log2_inv: Vec<f64> = inv.iter().map(|v| v.log2()).collect();
        let ln_inv: Vec<f64> = inv.iter().map(|v| v.ln()).collect();
        let ln_evals: Vec<f64> = evals.iter().map(|v| v.ln()).collect();
        Self {
            name: name.to_string(),
            solver: summaries
                .first()
                .map(|s| s.solver.clone())
                .unwrap_or_default(),
            success: rows.iter().all(|r| r.success),
            log_fit: linear_fit(&log2_inv, &evals),
            log_log_fit: linear_fit(&ln_inv, &ln_evals),
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,gradient_evals,ratio,success\n");
        for r in &self.rows {
            let ratio = r.ratio.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.epsilon, r.gradient_evals, ratio, r.success
            );
        }
        out
    }
}

pub struct SweepOutput {
    pub table: SweepTable,
    pub experiments: Vec<Written>,
    pub table_csv: PathBuf,
    pub table_json: PathBuf,
    pub trace: PathBuf,
}

/// Runs `cfg` at every tolerance in `epsilons` (strictly decreasing) and
/// writes per-tolerance files plus a merged trace and the scaling table.
pub fn run_sweep(cfg: &ExperimentConfig, epsilons: &[f64], dir: &Path) -> Result<SweepOutput> {
    if epsilons.len() < 2 {
        return Err(CliError::usage("a sweep needs at least two tolerances"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(CliError::usage(format!(
            "tolerances must be positive, got {e}"
        )));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::usage("tolerances must be strictly decreasing"));
    }
    let name = cfg.name();
    let results: Vec<(ExperimentSummary, Vec<TraceRecord>)> = epsilons
        .par_iter()
        .map(|&eps| run_experiment(cfg, eps, &format!("{name}-eps{eps:e}")))
        .collect::<Result<_>>()?;

    let mut experiments = Vec::with_capacity(results.len());
    let mut merged = Vec::new();
    for (summary, trace) in &results {
        experiments.push(write_experiment(dir, &summary.name, summary, trace)?);
        merged.extend_from_slice(trace);
    }
    let summaries: Vec<ExperimentSummary> = results.into_iter().map(|(s, _)| s).collect();
    let table = SweepTable::new(name, &summaries);

    let trace = dir.join(format!("{name}.sweep.trace.csv"));
    fs::write(&trace, trace_csv(&merged))?;
    let table_csv = dir.join(format!("{name}.sweep.csv"));
    fs::write(&table_csv, table.to_csv())?;
    let table_json = dir.join(format!("{name}.sweep.json"));
    let mut json = serde_json::to_string_pretty(&table).map_err(std::io::Error::other)?;
    json.push('\n');
    fs::write(&table_json, json)?;
    Ok(SweepOutput {
        table,
        experiments,
        table_csv,
        table_json,
        trace,
    })
}
