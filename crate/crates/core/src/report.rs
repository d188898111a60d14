//! Solver outputs shared by every driver.

use serde::Serialize;

/// One stage (convex drivers) or outer iteration (nonconvex drivers).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub index: u64,
    /// `sigma_s` for accumulative drivers, `l_i` for nonconvex drivers,
    /// `mu_{t-1}` for the strongly convex driver.
    pub parameter: f64,
    /// Cumulative gradient evaluations at the end of the row.
    pub grad_evals: u64,
    /// Gradient norm at the row's iterate when it was evaluated.
    pub grad_norm: Option<f64>,
    /// Objective value at the row's iterate when it was evaluated.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub solution: Vec<f64>,
    /// `|grad f(x)|`, or `|G_eta(x)|` on constrained problems.
    pub grad_norm: f64,
    /// Counter delta over the run.
    pub gradient_evals: u64,
    pub value_evals: u64,
    pub trace: Vec<TraceRow>,
    /// True when the driver's own success certificate holds.
    pub converged: bool,
}
