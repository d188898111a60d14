//! Restarted accumulative regularization for strongly convex objectives
//! (SCAR).
//!
//! Each round runs [`ar`] from the incumbent with `sigma_1 = mu / 10`. A round
//! that fails to halve the gradient norm refutes the current guess of `mu`:
//! without a supplied `mu_0` the guess is quartered and the round retried from
//! the same point; with a supplied `mu_0` the call returns `flag = false`,
//! certifying that `f` is not `mu_0`-strongly convex.

use crate::adaptive::{ar, estimate_initial_m, ArOptions};
use crate::error::{check_dim, require, Error, Result};
use crate::linalg::norm;
use crate::oracle::Oracle;
use crate::report::{SolverReport, TraceRow};
use serde::{Deserialize, Serialize};

/// Hard cap on SCAR rounds.
pub const MAX_ROUNDS: u64 = 1_000_000;

/// Point returned when strong convexity is refuted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefutePolicy {
    /// The iterate with the smallest observed gradient norm.
    #[default]
    BestIncumbent,
    /// The starting point `y_0`.
    InitialPoint,
}

#[derive(Debug, Clone, Default)]
pub struct ScarOptions {
    /// Strong convexity guess to certify; enables `flag = false` results.
    pub mu0: Option<f64>,
    /// Initial curvature estimate.
    pub m0: Option<f64>,
    pub refute_policy: RefutePolicy,
    /// `grad f(y_0)` if already paid for.
    pub initial_gradient: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScarRound {
    pub index: u64,
    /// `mu_{t-1}`, so `sigma_1 = mu / 10`.
    pub mu: f64,
    /// Gradient norm at the AR output.
    pub grad_norm: f64,
    /// Gradient norm at the incumbent the round started from.
    pub previous_grad_norm: f64,
    pub accepted: bool,
    pub m: f64,
    pub ar_stages: usize,
    pub f_value: Option<f64>,
    /// Counter delta since the start of the call.
    pub grad_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScarResult {
    pub solution: Vec<f64>,
    /// `grad f(solution)`.
    pub gradient: Vec<f64>,
    pub grad_norm: f64,
    /// `f(solution)` when it was evaluated.
    pub f_value: Option<f64>,
    pub m: f64,
    /// True when `|grad f(solution)| <= epsilon`.
    pub flag: bool,
    /// Rounds in which `mu` was quartered.
    pub restarts: u64,
    pub mu_final: f64,
    /// `mu_0` and `M_0` actually used (after the probe, if any).
    pub mu0: Option<f64>,
    pub m0: Option<f64>,
    /// Secant estimate from the initial probe, if one was taken.
    pub probe: Option<f64>,
    pub gradient_evals: u64,
    pub value_evals: u64,
    pub rounds: Vec<ScarRound>,
}

impl ScarResult {
    pub fn to_report(&self) -> SolverReport {
        SolverReport {
            solution: self.solution.clone(),
            grad_norm: self.grad_norm,
            gradient_evals: self.gradient_evals,
            value_evals: self.value_evals,
            trace: self
                .rounds
                .iter()
                .map(|r| TraceRow {
                    index: r.index,
                    parameter: r.mu,
                    grad_evals: r.grad_evals,
                    grad_norm: Some(r.grad_norm),
                    value: r.f_value,
                })
                .collect(),
            converged: self.flag,
        }
    }
}

struct Incumbent {
    point: Vec<f64>,
    gradient: Vec<f64>,
    grad_norm: f64,
    f_value: Option<f64>,
}

/// `(x_hat, M, flag) = SCAR(f, epsilon, y_0, mu_0, M_0)`.
///
/// A round whose output already meets `epsilon` terminates with
/// `flag = true` even if it did not halve the gradient norm.
pub fn scar(
    oracle: &Oracle<'_>,
    epsilon: f64,
    y0: &[f64],
    opts: &ScarOptions,
) -> Result<ScarResult> {
    check_dim(oracle.dim(), y0.len())?;
    require(epsilon > 0.0, || {
        format!("epsilon must be positive, got {epsilon}")
    })?;
    for (name, v) in [("mu0", opts.mu0), ("M0", opts.m0)] {
        if let Some(v) = v {
            require(v > 0.0 && v.is_finite(), || {
                format!("{name} must be positive and finite, got {v}")
            })?;
        }
    }
    let counter = oracle.counter();
    let start = counter.snapshot();

    let g0 = match &opts.initial_gradient {
        Some(g) => {
            check_dim(oracle.dim(), g.len())?;
            g.clone()
        }
        None => oracle.gradient(y0)?,
    };
    let n0 = norm(&g0);
    let finish = |inc: Incumbent,
                  flag: bool,
                  m: f64,
                  mu: f64,
                  restarts: u64,
                  mu0: Option<f64>,
                  m0: Option<f64>,
                  probe: Option<f64>,
                  rounds: Vec<ScarRound>| ScarResult {
        solution: inc.point,
        gradient: inc.gradient,
        grad_norm: inc.grad_norm,
        f_value: inc.f_value,
        m,
        flag,
        restarts,
        mu_final: mu,
        mu0,
        m0,
        probe,
        gradient_evals: start.gradient_delta(counter),
        value_evals: start.value_delta(counter),
        rounds,
    };
    if n0 <= epsilon {
        let inc = Incumbent {
            point: y0.to_vec(),
            gradient: g0,
            grad_norm: n0,
            f_value: None,
        };
        let m = opts.m0.unwrap_or(f64::NAN);
        let mu = opts.mu0.unwrap_or(f64::NAN);
        return Ok(finish(
            inc,
            true,
            m,
            mu,
            0,
            opts.mu0,
            opts.m0,
            None,
            Vec::new(),
        ));
    }

    let (g0, probe) = if opts.mu0.is_none() || opts.m0.is_none() {
        let p = estimate_initial_m(oracle, y0, Some(g0))?;
        (p.gradient_at_x0, Some(p.m))
    } else {
        (g0, None)
    };
    let certify = opts.mu0.is_some();
    let mut mu = opts.mu0.or(probe).expect("probe taken when mu0 is absent");
    let mut m = opts.m0.or(probe).expect("probe taken when M0 is absent");
    let (mu0, m0) = (Some(mu), Some(m));

    let initial_gradient = g0.clone();
    let mut y = Incumbent {
        point: y0.to_vec(),
        gradient: g0,
        grad_norm: n0,
        f_value: None,
    };
    let mut best: Option<Incumbent> = None;
    let mut rounds = Vec::new();
    let mut restarts = 0u64;

    for t in 1..=MAX_ROUNDS {
        let ar_opts = ArOptions {
            initial_gradient: Some(y.gradient.clone()),
            ..Default::default()
        };
        let r = ar(oracle, &y.point, mu / 10.0, m, &ar_opts)?;
        m = r.m;
        let accepted = r.grad_norm <= 0.5 * y.grad_norm;
        rounds.push(ScarRound {
            index: t,
            mu,
            grad_norm: r.grad_norm,
            previous_grad_norm: y.grad_norm,
            accepted,
            m,
            ar_stages: r.stages_run,
            f_value: r.f_value,
            grad_evals: start.gradient_delta(counter),
        });
        let out = Incumbent {
            point: r.solution,
            gradient: r.gradient,
            grad_norm: r.grad_norm,
            f_value: r.f_value,
        };
        if out.grad_norm <= epsilon {
            return Ok(finish(out, true, m, mu, restarts, mu0, m0, probe, rounds));
        }
        if accepted {
            y = out;
            continue;
        }
        if certify {
            let inc = match opts.refute_policy {
                RefutePolicy::InitialPoint => Incumbent {
                    point: y0.to_vec(),
                    gradient: initial_gradient,
                    grad_norm: n0,
                    f_value: None,
                },
                RefutePolicy::BestIncumbent => {
                    let cand = pick_best(best.take(), out);
                    if cand.grad_norm < y.grad_norm {
                        cand
                    } else {
                        y
                    }
                }
            };
            return Ok(finish(inc, false, m, mu, restarts, mu0, m0, probe, rounds));
        }
        best = Some(pick_best(best.take(), out));
        mu /= 4.0;
        restarts += 1;
    }
    Err(Error::NoProgress(MAX_ROUNDS as usize))
}

fn pick_best(best: Option<Incumbent>, cand: Incumbent) -> Incumbent {
    match best {
        Some(b) if b.grad_norm <= cand.grad_norm => b,
        _ => cand,
    }
}
