//! Accumulative regularization with a fixed parameter schedule.
//!
//! Stage `s` approximately minimizes `f + phi + sigma_s/2 |x - xbar_s|^2` from
//! the previous stage's solution with a fixed gradient budget `N_s`. The
//! prox-center is the running average
//! `sigma_s xbar_s = sum_{i <= s} (sigma_i - sigma_{i-1}) x_{i-1}`.

use crate::agd::{solve_fixed_budget, AgdOptions, Subproblem, C_A};
use crate::error::{check_dim, require, Error, Result};
use crate::oracle::Oracle;
use crate::prox::{projected_gradient, FeasibleRegion};
use crate::report::{SolverReport, TraceRow};

/// Stage parameters for a known `L`, distance bound `D` and target `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArSchedule {
    pub epsilon: f64,
    pub lipschitz: f64,
    pub distance: f64,
    pub constrained: bool,
    pub sigma: Vec<f64>,
    pub budgets: Vec<u64>,
    /// Step parameter of the final certificate `|G_eta(x_S)|`, `eta = 2 L`.
    pub target_eta: f64,
}

impl ArSchedule {
    pub fn stages(&self) -> usize {
        self.sigma.len()
    }

    pub fn total_budget(&self) -> u64 {
        self.budgets.iter().sum()
    }
}

/// Smallest integer `k >= 0` with `4^k >= ratio`.
fn ceil_log4(ratio: f64) -> u32 {
    let mut k = 0u32;
    let mut p = 1.0_f64;
    while p < ratio {
        p *= 4.0;
        k += 1;
    }
    k
}

/// `N = ceil(8 sqrt(2 c_A L / sigma))`.
pub fn stage_budget(lipschitz: f64, sigma: f64) -> u64 {
    (8.0 * (2.0 * C_A * lipschitz / sigma).sqrt()).ceil() as u64
}

/// Builds the schedule
///
/// * unconstrained: `S = 1 + ceil(log4(LD/eps))`, `sigma_s = 4^(s-2) eps / D`;
/// * constrained: `S = 2 + ceil(log4(LD/eps))`, `sigma_s = 4^(s-3) eps / D`;
///
/// with `N_s = ceil(8 sqrt(2 c_A L / sigma_s))`. When `eps >= LD` a single
/// stage is returned.
pub fn build_schedule(
    lipschitz: f64,
    distance: f64,
    epsilon: f64,
    constrained: bool,
) -> Result<ArSchedule> {
    for (name, v) in [("L", lipschitz), ("D", distance), ("epsilon", epsilon)] {
        require(v > 0.0 && v.is_finite(), || {
            format!("{name} must be positive and finite, got {v}")
        })?;
    }
    let ratio = lipschitz * distance / epsilon;
    let offset: i32 = if constrained { 3 } else { 2 };
    let stages = if epsilon >= lipschitz * distance {
        1
    } else {
        (offset - 1) as u32 + ceil_log4(ratio)
    };
    let sigma: Vec<f64> = (1..=stages as i32)
        .map(|s| 4f64.powi(s - offset) * epsilon / distance)
        .collect();
    let budgets = sigma.iter().map(|&s| stage_budget(lipschitz, s)).collect();
    Ok(ArSchedule {
        epsilon,
        lipschitz,
        distance,
        constrained,
        sigma,
        budgets,
        target_eta: 2.0 * lipschitz,
    })
}

/// `(1 - gamma) xbar_prev + gamma x_prev` with `gamma = 1 - sigma_prev / sigma_next`.
pub fn update_prox_center(
    xbar_prev: &[f64],
    x_prev: &[f64],
    sigma_prev: f64,
    sigma_next: f64,
) -> Result<Vec<f64>> {
    check_dim(xbar_prev.len(), x_prev.len())?;
    require(sigma_prev >= 0.0, || {
        format!("sigma_prev must be nonnegative, got {sigma_prev}")
    })?;
    if !(sigma_prev < sigma_next) {
        return Err(Error::ScheduleNotIncreasing {
            prev: sigma_prev,
            next: sigma_next,
        });
    }
    let gamma = 1.0 - sigma_prev / sigma_next;
    Ok(xbar_prev
        .iter()
        .zip(x_prev)
        .map(|(b, x)| (1.0 - gamma) * b + gamma * x)
        .collect())
}

/// Record of one completed stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageState {
    pub index: usize,
    pub sigma: f64,
    pub prox_center: Vec<f64>,
    /// `x_{s-1}`, the warm start.
    pub start: Vec<f64>,
    /// `x_s`.
    pub solution: Vec<f64>,
    /// `F_s(x_s)`.
    pub objective: f64,
    pub evals_used: u64,
    pub lipschitz_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedRun {
    pub report: SolverReport,
    pub stages: Vec<StageState>,
}

/// Runs all stages of `schedule` from `x0`.
///
/// Costs one gradient evaluation for the certificate at `x0` (returned
/// immediately if it already meets `epsilon`; otherwise reused by stage 1),
/// `sum N_s` for the stages, and one for the final certificate
/// `|G_{2L}(x_S)|` (`|grad f(x_S)|` when unconstrained).
pub fn run_fixed(
    oracle: &Oracle<'_>,
    region: &dyn FeasibleRegion,
    schedule: &ArSchedule,
    x0: &[f64],
) -> Result<FixedRun> {
    check_dim(oracle.dim(), x0.len())?;
    require(region.contains(x0), || {
        "initial point lies outside the feasible region".into()
    })?;
    require(
        !schedule.sigma.is_empty() && schedule.sigma.len() == schedule.budgets.len(),
        || "schedule must have matching, nonempty sigma and budget lists".into(),
    )?;
    let counter = oracle.counter();
    let start = counter.snapshot();
    let eta = schedule.target_eta;

    let g0 = oracle.gradient(x0)?;
    let cert0 = projected_gradient(region, &g0, eta, x0)?.norm();
    if cert0 <= schedule.epsilon {
        return Ok(FixedRun {
            report: SolverReport {
                solution: x0.to_vec(),
                grad_norm: cert0,
                gradient_evals: start.gradient_delta(counter),
                value_evals: start.value_delta(counter),
                trace: vec![TraceRow {
                    index: 0,
                    parameter: 0.0,
                    grad_evals: start.gradient_delta(counter),
                    grad_norm: Some(cert0),
                    value: None,
                }],
                converged: true,
            },
            stages: Vec::new(),
        });
    }

    let mut trace = vec![TraceRow {
        index: 0,
        parameter: 0.0,
        grad_evals: start.gradient_delta(counter),
        grad_norm: Some(cert0),
        value: None,
    }];
    let mut stages = Vec::with_capacity(schedule.stages());
    let mut xbar = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let mut sigma_prev = 0.0;
    let mut known = Some(g0);

    for (s, (&sigma, &budget)) in schedule.sigma.iter().zip(&schedule.budgets).enumerate() {
        xbar = update_prox_center(&xbar, &x_prev, sigma_prev, sigma)?;
        let sp = Subproblem::new(region, sigma, &xbar);
        let opts = AgdOptions {
            initial_gradient: known.take(),
            record_history: false,
        };
        let res = solve_fixed_budget(oracle, &sp, &x_prev, budget, schedule.lipschitz, &opts)?;
        trace.push(TraceRow {
            index: (s + 1) as u64,
            parameter: sigma,
            grad_evals: start.gradient_delta(counter),
            grad_norm: None,
            value: Some(res.f_value),
        });
        stages.push(StageState {
            index: s + 1,
            sigma,
            prox_center: xbar.clone(),
            start: x_prev.clone(),
            solution: res.solution.clone(),
            objective: res.objective,
            evals_used: res.evals_used,
            lipschitz_estimate: res.lipschitz_estimate,
        });
        x_prev = res.solution;
        sigma_prev = sigma;
    }

    let g = oracle.gradient(&x_prev)?;
    let cert = projected_gradient(region, &g, eta, &x_prev)?.norm();
    if let Some(last) = trace.last_mut() {
        last.grad_norm = Some(cert);
        last.grad_evals = start.gradient_delta(counter);
    }
    Ok(FixedRun {
        report: SolverReport {
            solution: x_prev,
            grad_norm: cert,
            gradient_evals: start.gradient_delta(counter),
            value_evals: start.value_delta(counter),
            trace,
            converged: cert <= schedule.epsilon,
        },
        stages,
    })
}
