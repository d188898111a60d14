//! Accelerated composite gradient method with backtracking for the
//! regularized subproblems
//!
//! ```text
//! min_{x in X} F_s(x) = f(x) + phi(x) + sigma/2 |x - xbar|^2
//! ```
//!
//! The regularizer and `phi` are handled exactly by the composite prox of
//! [`FeasibleRegion`]; backtracking only probes the smoothness of `f`. The
//! backtracking estimate `M` starts at the caller's hint and never decreases
//! within a solve, so after `k` iterations
//! `F_s(x_k) - F_s* <= 2 M_k |x_init - x_s*|^2 / (k + 1)^2`.
//! The reported Lipschitz estimate is `L_s^k = 2 M_k`.

use crate::error::{check_dim, require, Error, Result};
use crate::linalg::{dot, norm, norm_sq, sub};
use crate::oracle::Oracle;
use crate::prox::FeasibleRegion;

/// The subroutine constant: `L_s <= C_A * L` whenever the starting estimate
/// does not exceed `L`.
pub const C_A: f64 = 4.0;

/// Hard cap on consecutive backtracking doublings in one iteration.
pub const MAX_DOUBLINGS: u32 = 200;

/// `f_new <= f_old + lin + quad`, with slack for rounding.
///
/// Besides the four terms themselves, `f` is only known up to about
/// `EPS |grad f| |x|` (the effect of rounding its argument), which can be far
/// larger than `EPS |f|` when `f` is a small difference of large terms.
/// Without that allowance, steps taken at a minimizer fail the test on noise
/// alone and every doubling makes the failure more likely.
pub(crate) fn descent_holds(f_new: f64, f_old: f64, lin: f64, quad: f64, input_scale: f64) -> bool {
    let slack =
        8.0 * f64::EPSILON * (f_new.abs() + f_old.abs() + lin.abs() + quad.abs() + input_scale);
    f_new - f_old - lin <= quad + slack
}

/// `|g| max(|a|, |b|)`, the `input_scale` of [`descent_holds`] for a step
/// between `a` and `b` with gradient `g`.
pub(crate) fn input_scale(g: &[f64], a: &[f64], b: &[f64]) -> f64 {
    norm(g) * norm(a).max(norm(b))
}

/// One regularized subproblem: region, `sigma > 0` and prox-center `xbar`.
#[derive(Clone, Copy)]
pub struct Subproblem<'a> {
    pub region: &'a dyn FeasibleRegion,
    pub sigma: f64,
    pub prox_center: &'a [f64],
}

impl<'a> Subproblem<'a> {
    pub fn new(region: &'a dyn FeasibleRegion, sigma: f64, prox_center: &'a [f64]) -> Self {
        Self {
            region,
            sigma,
            prox_center,
        }
    }

    /// `F_s(x)` given `f(x)`.
    pub fn objective(&self, f_value: f64, x: &[f64]) -> f64 {
        let d = sub(x, self.prox_center);
        f_value + self.region.phi(x) + 0.5 * self.sigma * norm_sq(&d)
    }

    fn validate(&self, dim: usize, x_init: &[f64]) -> Result<()> {
        check_dim(dim, self.prox_center.len())?;
        check_dim(dim, x_init.len())?;
        require(self.sigma > 0.0 && self.sigma.is_finite(), || {
            format!("sigma must be positive and finite, got {}", self.sigma)
        })?;
        require(self.region.contains(x_init), || {
            "initial point lies outside the feasible region".into()
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct AgdOptions {
    /// `grad f(x_init)` if already paid for; used for the first iteration
    /// without charging the counter.
    pub initial_gradient: Option<Vec<f64>>,
    /// Record one [`AgdStep`] per completed iteration.
    pub record_history: bool,
}

/// State after a completed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AgdStep {
    pub k: u64,
    pub m: f64,
    pub lipschitz_estimate: f64,
    /// `F_s` at the best iterate so far.
    pub best_objective: f64,
    /// The best iterate so far.
    pub best_point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubroutineResult {
    /// Iterate with the smallest `F_s` seen (including `x_init`).
    pub solution: Vec<f64>,
    /// `F_s(solution)`.
    pub objective: f64,
    /// `f(solution)`.
    pub f_value: f64,
    /// Final backtracking estimate `M`.
    pub m: f64,
    /// `L_s = 2 M`.
    pub lipschitz_estimate: f64,
    /// Completed iterations `k`.
    pub iterations: u64,
    /// Gradient evaluations consumed, counting a reused initial gradient and
    /// one charge per failed backtracking trial.
    pub evals_used: u64,
    pub failed_trials: u64,
    pub history: Vec<AgdStep>,
}

impl SubroutineResult {
    /// `(L_s / k^2)`, the coefficient of `|x_init - x_s*|^2` in the
    /// certified gap bound.
    pub fn gap_coefficient(&self) -> f64 {
        if self.iterations == 0 {
            return f64::INFINITY;
        }
        self.lipschitz_estimate / (self.iterations as f64).powi(2)
    }
}

#[derive(Clone, Copy)]
enum Stop {
    Budget(u64),
    SelfTerminating,
}

/// Runs exactly `budget` gradient evaluations (failed backtracking trials
/// included) starting from `M = lipschitz`.
///
/// With `lipschitz` at least the true constant no trial fails, and the result
/// satisfies `F_s(x) - F_s* <= (4 L / budget^2) |x_init - x_s*|^2`.
pub fn solve_fixed_budget(
    oracle: &Oracle<'_>,
    sub: &Subproblem<'_>,
    x_init: &[f64],
    budget: u64,
    lipschitz: f64,
    opts: &AgdOptions,
) -> Result<SubroutineResult> {
    require(budget >= 1, || "budget must be at least 1".into())?;
    require(lipschitz > 0.0 && lipschitz.is_finite(), || {
        format!("lipschitz must be positive and finite, got {lipschitz}")
    })?;
    run(oracle, sub, x_init, lipschitz, Stop::Budget(budget), opts)
}

/// Runs until `k >= 8 sqrt(2 L_s^k / sigma)` after the `k`-th iteration.
///
/// Backtracking starts at `l_hint / 2`, so a hint of at most `2 L` yields
/// `L_s <= 4 L`. A poor hint only changes the number of trials.
pub fn solve_self_terminating(
    oracle: &Oracle<'_>,
    sub: &Subproblem<'_>,
    x_init: &[f64],
    l_hint: f64,
    opts: &AgdOptions,
) -> Result<SubroutineResult> {
    require(l_hint > 0.0 && l_hint.is_finite(), || {
        format!("l_hint must be positive and finite, got {l_hint}")
    })?;
    run(
        oracle,
        sub,
        x_init,
        0.5 * l_hint,
        Stop::SelfTerminating,
        opts,
    )
}

/// `k >= 8 sqrt(2 L / sigma)`.
pub fn termination_reached(k: u64, lipschitz_estimate: f64, sigma: f64) -> bool {
    k as f64 >= 8.0 * (2.0 * lipschitz_estimate / sigma).sqrt()
}

fn run(
    oracle: &Oracle<'_>,
    sp: &Subproblem<'_>,
    x_init: &[f64],
    m_start: f64,
    stop: Stop,
    opts: &AgdOptions,
) -> Result<SubroutineResult> {
    sp.validate(oracle.dim(), x_init)?;
    if let Some(g) = &opts.initial_gradient {
        check_dim(oracle.dim(), g.len())?;
    }
    let sigma = sp.sigma;
    let xbar = sp.prox_center;

    let mut m = m_start;
    let mut x_prev = x_init.to_vec();
    let mut y = x_init.to_vec();
    let mut t = 1.0_f64;
    let mut known = opts.initial_gradient.clone();

    let mut best_point = x_init.to_vec();
    let mut best_f = f64::NAN;
    let mut best_obj = f64::INFINITY;

    let mut used = 0u64;
    let mut k = 0u64;
    let mut failed = 0u64;
    let mut history = Vec::new();

    loop {
        if let Stop::Budget(b) = stop {
            if used >= b {
                break;
            }
        }
        let g = match known.take() {
            Some(g) if k == 0 => g,
            _ => oracle.gradient(&y)?,
        };
        used += 1;
        let fy = oracle.value(&y)?;
        if k == 0 {
            best_f = fy;
            best_obj = sp.objective(fy, &y);
        }

        let mut doublings = 0u32;
        let accepted = loop {
            let xt = sp.region.composite_prox(&g, sigma, xbar, m, &y);
            if !xt.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("composite prox"));
            }
            let d = sub(&xt, &y);
            let fx = oracle.value(&xt)?;
            let scale = input_scale(&g, &y, &xt);
            if descent_holds(fx, fy, dot(&g, &d), 0.5 * m * norm_sq(&d), scale) {
                break Some((xt, fx));
            }
            if let Stop::Budget(b) = stop {
                if used >= b {
                    break None;
                }
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::NotSmooth(MAX_DOUBLINGS));
            }
            oracle.charge_gradient();
            used += 1;
            failed += 1;
            m *= 2.0;
        };
        let Some((x_new, f_new)) = accepted else {
            break;
        };
        k += 1;

        let obj = sp.objective(f_new, &x_new);
        if obj < best_obj {
            best_obj = obj;
            best_f = f_new;
            best_point.clone_from(&x_new);
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = x_new
            .iter()
            .zip(&x_prev)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        x_prev = x_new;
        t = t_next;

        if opts.record_history {
            history.push(AgdStep {
                k,
                m,
                lipschitz_estimate: 2.0 * m,
                best_objective: best_obj,
                best_point: best_point.clone(),
            });
        }
        if let Stop::SelfTerminating = stop {
            if termination_reached(k, 2.0 * m, sigma) {
                break;
            }
        }
    }

    Ok(SubroutineResult {
        solution: best_point,
        objective: best_obj,
        f_value: best_f,
        m,
        lipschitz_estimate: 2.0 * m,
        iterations: k,
        evals_used: used,
        failed_trials: failed,
        history,
    })
}
