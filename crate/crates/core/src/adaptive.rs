//! Accumulative regularization without knowledge of `L`.
//!
//! [`ar`] grows `sigma_s` by 4 each stage, solves each subproblem with the
//! self-terminating subroutine and follows it with one backtracking gradient
//! step ([`local_line_search`]) whose accepted curvature `M_s` certifies
//! `|grad f_s(x_s)| <= 2 sqrt(2) (M_s + sigma_s) |x_s - x_s*|`. The method
//! stops once `sigma_s >= M_s`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agd::{
    descent_holds, input_scale, solve_self_terminating, AgdOptions, Subproblem, C_A, MAX_DOUBLINGS,
};
use crate::error::{check_dim, require, Error, Result};
use crate::linalg::{dist, dot, norm, norm_sq, sub, unit};
use crate::oracle::Oracle;
use crate::prox::{gradient_mapping, projected_gradient, FeasibleRegion, Region};
use crate::report::{SolverReport, TraceRow};

static UNCONSTRAINED: Region = Region::Unconstrained;

/// `C_1 = 3 + 16 sqrt(2 c_A)`.
pub fn c1() -> f64 {
    3.0 + 16.0 * (2.0 * C_A).sqrt()
}

/// Coordinate probes tried before falling back to random directions.
const COORDINATE_PROBES: usize = 8;
/// Total probe directions before giving up.
const MAX_PROBES: usize = 9;
const PROBE_SEED: u64 = 0x5eed_0f_1a7e;
/// Hard cap on AR stages; `sigma` grows by 4 per stage so this only guards
/// against non-finite curvature estimates.
const MAX_STAGES: usize = 600;
/// Hard cap on guess-and-check rounds.
pub const MAX_GUESS_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    /// Accepted `M_j = 2^j M_0`.
    pub m: f64,
    /// `grad f(x)`.
    pub gradient: Vec<f64>,
    /// `f(x)`.
    pub f_value: f64,
    pub failed_trials: u64,
}

/// One backtracking gradient step on `g = f + sigma/2 |. - xbar|^2` at `x`,
/// returning the smallest `M_j = 2^j M_0` with
///
/// ```text
/// g(x++) - g(x) - <grad g(x), x++ - x> <= (M_j + sigma)/2 |x++ - x|^2,
/// x++ = x - grad g(x) / (2 (M_j + sigma))
/// ```
///
/// On a nontrivial region `x++` is the gradient mapping of `g` with
/// `eta = 2 (M_j + sigma)`. Charges one gradient evaluation (none if
/// `known_gradient` is given) plus one per failed trial.
pub fn local_line_search(
    oracle: &Oracle<'_>,
    sp: &Subproblem<'_>,
    x: &[f64],
    m0: f64,
    known_gradient: Option<Vec<f64>>,
) -> Result<LineSearchOutcome> {
    check_dim(oracle.dim(), x.len())?;
    require(m0 > 0.0 && m0.is_finite(), || {
        format!("M0 must be positive and finite, got {m0}")
    })?;
    let sigma = sp.sigma;
    let gf = match known_gradient {
        Some(g) => {
            check_dim(oracle.dim(), g.len())?;
            g
        }
        None => oracle.gradient(x)?,
    };
    let fx = oracle.value(x)?;
    // The test runs on the smooth part h = f + sigma/2 |. - xbar|^2; phi and
    // the constraint enter only through the prox step.
    let smooth = |f_value: f64, u: &[f64]| f_value + 0.5 * sigma * norm_sq(&sub(u, sp.prox_center));
    let hx = smooth(fx, x);
    let grad_h: Vec<f64> = gf
        .iter()
        .zip(x.iter().zip(sp.prox_center))
        .map(|(gi, (xi, bi))| gi + sigma * (xi - bi))
        .collect();

    let mut m = m0;
    let mut failed = 0u64;
    loop {
        let eta = 2.0 * (m + sigma);
        let xpp = gradient_mapping(sp.region, &grad_h, eta, x)?;
        let d = sub(&xpp, x);
        let h_new = smooth(oracle.value(&xpp)?, &xpp);
        let quad = 0.5 * (m + sigma) * norm_sq(&d);
        let scale = input_scale(&grad_h, x, &xpp);
        if descent_holds(h_new, hx, dot(&grad_h, &d), quad, scale) {
            return Ok(LineSearchOutcome {
                m,
                gradient: gf,
                f_value: fx,
                failed_trials: failed,
            });
        }
        failed += 1;
        if failed > MAX_DOUBLINGS as u64 {
            return Err(Error::NotSmooth(MAX_DOUBLINGS));
        }
        oracle.charge_gradient();
        m *= 2.0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialProbe {
    /// `|grad f(x0) - grad f(z0)| / |x0 - z0|`.
    pub m: f64,
    pub gradient_at_x0: Vec<f64>,
    pub probes: usize,
}

/// Secant curvature estimate at `x0` along `z0 = x0 + delta u`,
/// `delta = 1e-2 max(1, |x0|)`.
///
/// Directions are `e_1, ..., e_8` (as far as the dimension allows) followed
/// by seeded random unit vectors, nine probes in total. The estimate never
/// exceeds the Lipschitz constant of `grad f`.
pub fn estimate_initial_m(
    oracle: &Oracle<'_>,
    x0: &[f64],
    known_gradient: Option<Vec<f64>>,
) -> Result<InitialProbe> {
    let n = oracle.dim();
    check_dim(n, x0.len())?;
    require(n >= 1, || "dimension must be at least 1".into())?;
    let g0 = match known_gradient {
        Some(g) => {
            check_dim(n, g.len())?;
            g
        }
        None => oracle.gradient(x0)?,
    };
    let delta = 1e-2 * norm(x0).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for probe in 0..MAX_PROBES {
        let u = if probe < COORDINATE_PROBES.min(n) {
            unit(n, probe)
        } else {
            random_unit(&mut rng, n)
        };
        let z: Vec<f64> = x0.iter().zip(&u).map(|(a, b)| a + delta * b).collect();
        let step = dist(x0, &z);
        if step == 0.0 {
            continue;
        }
        let gz = oracle.gradient(&z)?;
        let m = dist(&g0, &gz) / step;
        if m > 0.0 && m.is_finite() {
            return Ok(InitialProbe {
                m,
                gradient_at_x0: g0,
                probes: probe + 1,
            });
        }
    }
    Err(Error::GradientLocallyConstant(MAX_PROBES))
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

#[derive(Clone)]
pub struct ArOptions<'a> {
    pub region: &'a dyn FeasibleRegion,
    /// Return `x0` immediately when its certificate is at most this value.
    pub precheck_epsilon: f64,
    /// `grad f(x0)` if already paid for.
    pub initial_gradient: Option<Vec<f64>>,
}

impl Default for ArOptions<'_> {
    fn default() -> Self {
        Self {
            region: &UNCONSTRAINED,
            precheck_epsilon: 0.0,
            initial_gradient: None,
        }
    }
}

/// One completed AR stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ArStage {
    pub index: usize,
    pub sigma: f64,
    pub prox_center: Vec<f64>,
    pub start: Vec<f64>,
    pub solution: Vec<f64>,
    /// `grad f(x_s)` from the line search.
    pub gradient: Vec<f64>,
    pub f_value: f64,
    /// `M_s`.
    pub m: f64,
    /// `L_s` reported by the subroutine.
    pub lipschitz_estimate: f64,
    pub agd_iterations: u64,
    pub agd_failed_trials: u64,
    pub linesearch_failed_trials: u64,
    /// Counter delta since the start of the run.
    pub grad_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArResult {
    pub solution: Vec<f64>,
    /// Final curvature estimate `M`.
    pub m: f64,
    pub stages_run: usize,
    /// Counter delta over the call.
    pub gradient_evals: u64,
    pub value_evals: u64,
    /// Failed line-search trials, each charged one gradient evaluation.
    pub linesearch_extra_evals: u64,
    /// Failed backtracking trials inside the subroutine.
    pub subroutine_extra_evals: u64,
    /// `grad f(solution)`.
    pub gradient: Vec<f64>,
    /// `|grad f(solution)|`, or `|G_{2M}(solution)|` on a nontrivial region.
    pub grad_norm: f64,
    /// `f(solution)` when it was evaluated.
    pub f_value: Option<f64>,
    pub stages: Vec<ArStage>,
}

impl ArResult {
    pub fn to_report(&self) -> SolverReport {
        SolverReport {
            solution: self.solution.clone(),
            grad_norm: self.grad_norm,
            gradient_evals: self.gradient_evals,
            value_evals: self.value_evals,
            trace: self
                .stages
                .iter()
                .map(|s| TraceRow {
                    index: s.index as u64,
                    parameter: s.sigma,
                    grad_evals: s.grad_evals,
                    grad_norm: Some(norm(&s.gradient)),
                    value: Some(s.f_value),
                })
                .collect(),
            converged: true,
        }
    }
}

fn certificate(region: &dyn FeasibleRegion, g: &[f64], m: f64, x: &[f64]) -> Result<f64> {
    Ok(projected_gradient(region, g, 2.0 * m, x)?.norm())
}

/// The parameter-free AR method `(x_hat, M) = AR(f, x0, sigma_1, M_0)`.
///
/// For convex `f`, `|grad f(x_hat)| <= 5 sigma_1 dist(x0, X*)` and at most
/// `4 + log2(M/M_0) + C_1 sqrt(M / sigma_1)` gradient evaluations are used
/// by the stages and line searches. It terminates for nonconvex `f` too.
pub fn ar(
    oracle: &Oracle<'_>,
    x0: &[f64],
    sigma1: f64,
    m0: f64,
    opts: &ArOptions<'_>,
) -> Result<ArResult> {
    check_dim(oracle.dim(), x0.len())?;
    require(sigma1 > 0.0 && sigma1.is_finite(), || {
        format!("sigma_1 must be positive and finite, got {sigma1}")
    })?;
    require(m0 > 0.0 && m0.is_finite(), || {
        format!("M0 must be positive and finite, got {m0}")
    })?;
    let region = opts.region;
    require(region.contains(x0), || {
        "initial point lies outside the feasible region".into()
    })?;
    let counter = oracle.counter();
    let start = counter.snapshot();

    let g0 = match &opts.initial_gradient {
        Some(g) => {
            check_dim(oracle.dim(), g.len())?;
            g.clone()
        }
        None => oracle.gradient(x0)?,
    };
    let cert0 = certificate(region, &g0, m0, x0)?;
    if cert0 <= opts.precheck_epsilon {
        return Ok(ArResult {
            solution: x0.to_vec(),
            m: m0,
            stages_run: 0,
            gradient_evals: start.gradient_delta(counter),
            value_evals: start.value_delta(counter),
            linesearch_extra_evals: 0,
            subroutine_extra_evals: 0,
            gradient: g0,
            grad_norm: cert0,
            f_value: None,
            stages: Vec::new(),
        });
    }

    let mut xbar = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let mut sigma_prev = 0.0;
    let mut sigma = sigma1;
    let mut m_prev = m0;
    let mut known = Some(g0);
    let mut stages: Vec<ArStage> = Vec::new();
    let mut ls_extra = 0u64;
    let mut agd_extra = 0u64;

    for s in 1..=MAX_STAGES {
        if s > 1 {
            sigma = 4.0 * sigma_prev;
        }
        let gamma = 1.0 - sigma_prev / sigma;
        xbar = xbar
            .iter()
            .zip(&x_prev)
            .map(|(b, x)| (1.0 - gamma) * b + gamma * x)
            .collect();
        let sp = Subproblem::new(region, sigma, &xbar);
        let agd_opts = AgdOptions {
            initial_gradient: known.take(),
            record_history: false,
        };
        let res = solve_self_terminating(oracle, &sp, &x_prev, m_prev, &agd_opts)?;
        let ls = local_line_search(
            oracle,
            &sp,
            &res.solution,
            m_prev.max(res.lipschitz_estimate / C_A),
            None,
        )?;
        ls_extra += ls.failed_trials;
        agd_extra += res.failed_trials;
        let m_s = ls.m;
        stages.push(ArStage {
            index: s,
            sigma,
            prox_center: xbar.clone(),
            start: x_prev.clone(),
            solution: res.solution.clone(),
            gradient: ls.gradient.clone(),
            f_value: ls.f_value,
            m: m_s,
            lipschitz_estimate: res.lipschitz_estimate,
            agd_iterations: res.iterations,
            agd_failed_trials: res.failed_trials,
            linesearch_failed_trials: ls.failed_trials,
            grad_evals: start.gradient_delta(counter),
        });
        x_prev = res.solution;
        sigma_prev = sigma;
        m_prev = m_s;
        if sigma >= m_s {
            let grad_norm = certificate(region, &ls.gradient, m_s, &x_prev)?;
            return Ok(ArResult {
                solution: x_prev,
                m: m_s,
                stages_run: s,
                gradient_evals: start.gradient_delta(counter),
                value_evals: start.value_delta(counter),
                linesearch_extra_evals: ls_extra,
                subroutine_extra_evals: agd_extra,
                gradient: ls.gradient,
                grad_norm,
                f_value: Some(ls.f_value),
                stages,
            });
        }
        known = Some(ls.gradient);
    }
    Err(Error::NoProgress(MAX_STAGES))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessRound {
    pub index: usize,
    pub distance_guess: f64,
    pub sigma1: f64,
    pub grad_norm: f64,
    pub m: f64,
    pub gradient_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessAndCheckResult {
    pub solution: Vec<f64>,
    pub grad_norm: f64,
    /// `M_0` from the initial probe (`None` when `x0` already passed).
    pub m0: Option<f64>,
    pub rounds: Vec<GuessRound>,
    pub gradient_evals: u64,
    pub value_evals: u64,
}

impl GuessAndCheckResult {
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
                    index: r.index as u64,
                    parameter: r.sigma1,
                    grad_evals: r.gradient_evals,
                    grad_norm: Some(r.grad_norm),
                    value: None,
                })
                .collect(),
            converged: true,
        }
    }
}

/// Restarts [`ar`] from the same `x0` with `sigma_1 = eps / (5 D_t)`,
/// `D_t = 4 D_{t-1}`, until `|grad f(x_hat)| <= eps`. Failed rounds are
/// discarded.
pub fn guess_and_check(
    oracle: &Oracle<'_>,
    x0: &[f64],
    d0: f64,
    epsilon: f64,
) -> Result<GuessAndCheckResult> {
    check_dim(oracle.dim(), x0.len())?;
    require(d0 > 0.0 && d0.is_finite(), || {
        format!("D0 must be positive and finite, got {d0}")
    })?;
    require(epsilon > 0.0, || {
        format!("epsilon must be positive, got {epsilon}")
    })?;
    let counter = oracle.counter();
    let start = counter.snapshot();

    let g0 = oracle.gradient(x0)?;
    let n0 = norm(&g0);
    if n0 <= epsilon {
        return Ok(GuessAndCheckResult {
            solution: x0.to_vec(),
            grad_norm: n0,
            m0: None,
            rounds: Vec::new(),
            gradient_evals: start.gradient_delta(counter),
            value_evals: start.value_delta(counter),
        });
    }
    let probe = estimate_initial_m(oracle, x0, Some(g0))?;
    let m0 = probe.m;
    let g0 = probe.gradient_at_x0;

    let mut d = d0;
    let mut rounds = Vec::new();
    for t in 1..=MAX_GUESS_ROUNDS {
        d *= 4.0;
        let sigma1 = epsilon / (5.0 * d);
        let opts = ArOptions {
            precheck_epsilon: epsilon,
            initial_gradient: Some(g0.clone()),
            ..Default::default()
        };
        let r = ar(oracle, x0, sigma1, m0, &opts)?;
        rounds.push(GuessRound {
            index: t,
            distance_guess: d,
            sigma1,
            grad_norm: r.grad_norm,
            m: r.m,
            gradient_evals: start.gradient_delta(counter),
        });
        if r.grad_norm <= epsilon {
            return Ok(GuessAndCheckResult {
                solution: r.solution,
                grad_norm: r.grad_norm,
                m0: Some(m0),
                rounds,
                gradient_evals: start.gradient_delta(counter),
                value_evals: start.value_delta(counter),
            });
        }
    }
    Err(Error::DistanceGuessDiverged(MAX_GUESS_ROUNDS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{EvalCounter, FnObjective, Objective};

    fn diag(d: Vec<f64>) -> impl Objective {
        let d2 = d.clone();
        FnObjective::new(
            d.len(),
            move |x: &[f64]| 0.5 * x.iter().zip(&d).map(|(a, b)| b * a * a).sum::<f64>(),
            move |x: &[f64], g: &mut [f64]| {
                for i in 0..g.len() {
                    g[i] = d2[i] * x[i];
                }
            },
        )
    }

    #[test]
    fn c1_value() {
        assert!((c1() - (3.0 + 16.0 * 8f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn line_search_examples() {
        let f = diag(vec![4.0]);
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&f, &counter);
        let r = Region::Unconstrained;
        let xbar = [0.0];
        let sp = Subproblem::new(&r, 1.0, &xbar);
        let out = local_line_search(&oracle, &sp, &[1.0], 4.0, None).unwrap();
        assert_eq!(out.m, 4.0);
        assert_eq!(out.failed_trials, 0);
        assert_eq!(counter.gradient_evals(), 1);

        let out = local_line_search(&oracle, &sp, &[1.0], 1.0, None).unwrap();
        assert_eq!(out.m, 4.0);
        assert_eq!(out.failed_trials, 2);
        assert_eq!(counter.gradient_evals(), 1 + 1 + 2);

        let z = diag(vec![0.0, 0.0]);
        let oracle = Oracle::new(&z, &counter);
        let xbar = [0.3, 0.3];
        let sp = Subproblem::new(&r, 2.0, &xbar);
        let out = local_line_search(&oracle, &sp, &[1.0, -1.0], 0.125, None).unwrap();
        assert_eq!(out.m, 0.125);
    }

    #[test]
    fn probe_examples() {
        let f = diag(vec![1.0, 1.0, 1.0]);
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&f, &counter);
        let p = estimate_initial_m(&oracle, &[1.0, 2.0, 3.0], None).unwrap();
        assert!((p.m - 1.0).abs() < 1e-12);
        assert_eq!(counter.gradient_evals(), 2);

        let f = diag(vec![1.0, 9.0]);
        let oracle = Oracle::new(&f, &counter);
        let p = estimate_initial_m(&oracle, &[0.0, 0.0], Some(vec![0.0, 0.0])).unwrap();
        assert!((p.m - 1.0).abs() < 1e-12);
        assert_eq!(counter.gradient_evals(), 3);

        // Zero curvature along e_1 forces a resample onto e_2.
        let f = diag(vec![0.0, 9.0]);
        let oracle = Oracle::new(&f, &counter);
        let p = estimate_initial_m(&oracle, &[0.0, 0.0], None).unwrap();
        assert!((p.m - 9.0).abs() < 1e-9);
        assert_eq!(p.probes, 2);
    }

    #[test]
    fn linear_objective_has_no_curvature() {
        let f = FnObjective::new(
            3,
            |x: &[f64]| x[0] - 2.0 * x[2],
            |_: &[f64], g: &mut [f64]| g.copy_from_slice(&[1.0, 0.0, -2.0]),
        );
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&f, &counter);
        assert_eq!(
            estimate_initial_m(&oracle, &[0.0; 3], None),
            Err(Error::GradientLocallyConstant(MAX_PROBES))
        );
        assert_eq!(counter.gradient_evals(), 1 + MAX_PROBES as u64);
    }

    #[test]
    fn ar_stationary_start_returns_immediately() {
        let f = diag(vec![1.0, 2.0]);
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&f, &counter);
        let r = ar(&oracle, &[0.0, 0.0], 0.1, 3.0, &ArOptions::default()).unwrap();
        assert_eq!(r.solution, vec![0.0, 0.0]);
        assert_eq!(r.m, 3.0);
        assert_eq!(r.stages_run, 0);
        assert_eq!(r.gradient_evals, 1);
    }

    #[test]
    fn ar_unit_quadratic() {
        let f = diag(vec![1.0; 4]);
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&f, &counter);
        let x0 = [1.0, 0.0, 0.0, 0.0];
        let eps = 1e-2;
        let sigma1 = eps / 5.0;
        let r = ar(&oracle, &x0, sigma1, 1.0, &ArOptions::default()).unwrap();
        assert!(r.grad_norm <= 5.0 * sigma1);
        assert!(r.grad_norm <= eps);
        let bound = 4.0 + (r.m / 1.0).log2() + c1() * (r.m / sigma1).sqrt();
        assert!((r.gradient_evals as f64) <= bound);
        assert_eq!(r.gradient_evals, counter.gradient_evals());
        for w in r.stages.windows(2) {
            assert!(w[1].m >= w[0].m);
            assert!((w[1].sigma / w[0].sigma - 4.0).abs() < 1e-12);
        }
        assert!(r.m <= 2.0);
    }

    #[test]
    fn ar_terminates_on_nonconvex_objective() {
        let f = FnObjective::new(
            1,
            |x: &[f64]| x[0].cos(),
            |x: &[f64], g: &mut [f64]| g[0] = -x[0].sin(),
        );
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&f, &counter);
        let r = ar(&oracle, &[0.1], 1e-3, 0.5, &ArOptions::default()).unwrap();
        assert!(r.m <= 2.0);
        assert!(r.stages_run >= 1);
    }

    #[test]
    fn guess_and_check_examples() {
        let f = diag(vec![1.0; 3]);
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&f, &counter);
        let r = guess_and_check(&oracle, &[1e-4, 0.0, 0.0], 1.0, 1e-3).unwrap();
        assert!(r.rounds.is_empty());
        assert_eq!(r.gradient_evals, 1);

        let r = guess_and_check(&oracle, &[0.0, 1.0, 0.0], 1.0, 1e-3).unwrap();
        assert_eq!(r.rounds.len(), 1);
        assert!(r.grad_norm <= 1e-3);
    }
}
