//! Gradient minimization for nonconvex objectives with bounded lower
//! curvature.
//!
//! Both drivers run an inexact proximal point method: outer step `i` hands
//! `F(x) = f(x) + l_i |x - x^{i-1}|^2` to [`scar`] with tolerance `eps / 4`
//! and strong convexity guess `l_i`. [`run_fixed_nc`] uses a known `l` and
//! `L`; [`nascar`] searches for `l_i` itself, raising it by 4x whenever an
//! inner solve is refuted or the step fails the descent test
//! `|grad f(x^i)|^2 <= 10 l_i (f(x^{i-1}) - f(x^i))`.

use crate::adaptive::estimate_initial_m;
use crate::error::{check_dim, require, Error, Result};
use crate::linalg::{dist, norm_sq};
use crate::oracle::{Objective, Oracle};
use crate::report::{SolverReport, TraceRow};
use crate::strongly_convex::{scar, ScarOptions, ScarResult};

/// Safety cap on outer iterations.
pub const MAX_OUTER: u64 = 10_000_000;

/// `l` may not leave `[probe * 1e-12, probe * 1e12]` during the search.
pub const CURVATURE_RANGE: f64 = 1e12;

/// `F(x) = f(x) + l |x - u|^2`. One `F`-gradient costs one `f`-gradient.
pub struct ProximalObjective<'a> {
    inner: &'a dyn Objective,
    l: f64,
    center: &'a [f64],
}

impl<'a> ProximalObjective<'a> {
    pub fn new(inner: &'a dyn Objective, l: f64, center: &'a [f64]) -> Self {
        Self { inner, l, center }
    }

    /// Recovers `grad f(x)` from `grad F(x)` without another oracle call.
    pub fn inner_gradient(&self, x: &[f64], grad_f_cap: &[f64]) -> Vec<f64> {
        grad_f_cap
            .iter()
            .zip(x.iter().zip(self.center))
            .map(|(g, (xi, ui))| g - 2.0 * self.l * (xi - ui))
            .collect()
    }
}

impl Objective for ProximalObjective<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x) + self.l * dist(x, self.center).powi(2)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient_into(x, out);
        for (o, (xi, ui)) in out.iter_mut().zip(x.iter().zip(self.center)) {
            *o += 2.0 * self.l * (xi - ui);
        }
    }
}

/// Descent test `grad_norm_new^2 <= 10 l (f_prev - f_new)`.
pub fn accept_step(l: f64, f_prev: f64, f_new: f64, grad_norm_new: f64) -> bool {
    grad_norm_new * grad_norm_new <= 10.0 * l * (f_prev - f_new)
}

/// One inner solve, successful or not.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub outer: u64,
    /// Exponent `p` with `l = 4^p l_ref` (negative in the downward search).
    pub exponent: i64,
    pub l: f64,
    pub m: f64,
    pub flag: bool,
    pub grad_norm: f64,
    pub f_value: f64,
    pub descent_ok: bool,
    pub inner_rounds: usize,
    pub inner_restarts: u64,
    /// Cumulative gradient evaluations after the trial.
    pub grad_evals: u64,
}

/// An outer iterate `x^i` the driver moved to.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterStep {
    pub index: u64,
    pub point: Vec<f64>,
    pub l: f64,
    pub m: f64,
    pub f_value: f64,
    pub grad_norm: f64,
    /// Whether the descent test held for this step.
    pub descent_ok: bool,
    pub grad_evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonconvexRun {
    pub report: SolverReport,
    pub f_start: f64,
    pub outer: Vec<OuterStep>,
    pub trials: Vec<TrialRecord>,
    /// Exponent selected by the initial curvature search.
    pub j1: Option<i64>,
    /// Secant probe at `x^0`.
    pub m0: Option<f64>,
}

impl NonconvexRun {
    pub fn max_l(&self) -> f64 {
        self.outer.iter().map(|s| s.l).fold(0.0, f64::max)
    }
}

struct Trial {
    scar: ScarResult,
    point: Vec<f64>,
    grad_f: Vec<f64>,
    grad_norm: f64,
    f_value: f64,
    descent_ok: bool,
}

struct Driver<'o, 'a> {
    oracle: &'o Oracle<'a>,
    epsilon: f64,
    start: crate::oracle::EvalSnapshot,
    trials: Vec<TrialRecord>,
    outer: Vec<OuterStep>,
}

impl Driver<'_, '_> {
    /// Solves `F = f + l |. - u|^2` from `u` with `grad f(u)` already known.
    fn trial(
        &mut self,
        outer: u64,
        exponent: i64,
        u: &[f64],
        grad_u: &[f64],
        f_u: f64,
        l: f64,
        m: f64,
    ) -> Result<Trial> {
        let f_cap = ProximalObjective::new(self.oracle.objective(), l, u);
        let inner = Oracle::new(&f_cap, self.oracle.counter());
        let opts = ScarOptions {
            mu0: Some(l),
            m0: Some(m),
            initial_gradient: Some(grad_u.to_vec()),
            ..Default::default()
        };
        let r = scar(&inner, self.epsilon / 4.0, u, &opts)?;
        let grad_f = f_cap.inner_gradient(&r.solution, &r.gradient);
        let grad_norm = norm_sq(&grad_f).sqrt();
        let f_value = self.oracle.value(&r.solution)?;
        let descent_ok = accept_step(l, f_u, f_value, grad_norm);
        self.trials.push(TrialRecord {
            outer,
            exponent,
            l,
            m: r.m,
            flag: r.flag,
            grad_norm,
            f_value,
            descent_ok,
            inner_rounds: r.rounds.len(),
            inner_restarts: r.restarts,
            grad_evals: self.start.gradient_delta(self.oracle.counter()),
        });
        Ok(Trial {
            point: r.solution.clone(),
            scar: r,
            grad_f,
            grad_norm,
            f_value,
            descent_ok,
        })
    }

    fn step(&mut self, index: u64, l: f64, t: &Trial) {
        self.outer.push(OuterStep {
            index,
            point: t.point.clone(),
            l,
            m: t.scar.m,
            f_value: t.f_value,
            grad_norm: t.grad_norm,
            descent_ok: t.descent_ok,
            grad_evals: self.start.gradient_delta(self.oracle.counter()),
        });
    }

    fn finish(
        self,
        solution: Vec<f64>,
        grad_norm: f64,
        f_start: f64,
        j1: Option<i64>,
        m0: Option<f64>,
    ) -> NonconvexRun {
        let counter = self.oracle.counter();
        let trace = self
            .outer
            .iter()
            .map(|s| TraceRow {
                index: s.index,
                parameter: s.l,
                grad_evals: s.grad_evals,
                grad_norm: Some(s.grad_norm),
                value: Some(s.f_value),
            })
            .collect();
        NonconvexRun {
            report: SolverReport {
                solution,
                grad_norm,
                gradient_evals: self.start.gradient_delta(counter),
                value_evals: self.start.value_delta(counter),
                trace,
                converged: grad_norm <= self.epsilon,
            },
            f_start,
            outer: self.outer,
            trials: self.trials,
            j1,
            m0,
        }
    }
}

/// Inexact proximal point with known lower curvature `l` and smoothness `L`.
///
/// Each outer step calls `scar(F, eps/4, x^{i-1}, mu0 = l, M0 = L + 2l)` and
/// stops once `|grad f(x^i)| <= eps`. A refuted inner solve means `l` was
/// not a valid lower curvature bound and is reported as
/// [`Error::CurvatureModelViolated`].
pub fn run_fixed_nc(
    oracle: &Oracle<'_>,
    x0: &[f64],
    l: f64,
    lipschitz: f64,
    epsilon: f64,
) -> Result<NonconvexRun> {
    check_dim(oracle.dim(), x0.len())?;
    require(l > 0.0 && l <= lipschitz && lipschitz.is_finite(), || {
        format!("need 0 < l <= L, got l = {l}, L = {lipschitz}")
    })?;
    require(epsilon > 0.0, || {
        format!("epsilon must be positive, got {epsilon}")
    })?;
    let mut d = Driver {
        oracle,
        epsilon,
        start: oracle.counter().snapshot(),
        trials: Vec::new(),
        outer: Vec::new(),
    };
    let f_start = oracle.value(x0)?;
    let mut x = x0.to_vec();
    let mut g = oracle.gradient(x0)?;
    let mut f = f_start;
    for i in 1..=MAX_OUTER {
        let t = d.trial(i, 0, &x, &g, f, l, lipschitz + 2.0 * l)?;
        if !t.scar.flag {
            return Err(Error::CurvatureModelViolated(l));
        }
        d.step(i, l, &t);
        if t.grad_norm <= epsilon {
            return Ok(d.finish(t.point, t.grad_norm, f_start, None, None));
        }
        x = t.point;
        g = t.grad_f;
        f = t.f_value;
    }
    Err(Error::NoProgress(MAX_OUTER as usize))
}

/// Parameter-free nonconvex gradient minimization.
///
/// The first outer step searches `l_1 = 4^{j_1} M_0` over integer `j_1`,
/// starting from the secant probe `M_0` at `x^0`: upward until an inner
/// solve succeeds and passes the descent test, or, if the first attempt
/// already passes, downward while attempts keep passing, keeping the last
/// passing one. Later steps start from `l_{i-1}` and only move up.
///
/// A trial whose inner solve succeeds with `|grad f| <= eps` ends the run
/// immediately, whether or not it passes the descent test.
pub fn nascar(oracle: &Oracle<'_>, x0: &[f64], epsilon: f64) -> Result<NonconvexRun> {
    check_dim(oracle.dim(), x0.len())?;
    require(epsilon > 0.0, || {
        format!("epsilon must be positive, got {epsilon}")
    })?;
    let mut d = Driver {
        oracle,
        epsilon,
        start: oracle.counter().snapshot(),
        trials: Vec::new(),
        outer: Vec::new(),
    };
    let g0 = oracle.gradient(x0)?;
    let gn0 = norm_sq(&g0).sqrt();
    let f_start = oracle.value(x0)?;
    if gn0 <= epsilon {
        return Ok(d.finish(x0.to_vec(), gn0, f_start, None, None));
    }
    let probe = estimate_initial_m(oracle, x0, Some(g0))?;
    let m0 = probe.m;
    let g0 = probe.gradient_at_x0;
    let (l_min, l_max) = (m0 / CURVATURE_RANGE, m0 * CURVATURE_RANGE);

    // Initial curvature search.
    let mut p: i64 = 0;
    let mut l = m0;
    let mut m = m0;
    let mut t = d.trial(1, p, x0, &g0, f_start, l, m)?;
    m = t.scar.m;
    if t.scar.flag && t.grad_norm <= epsilon {
        d.step(1, l, &t);
        return Ok(d.finish(t.point, t.grad_norm, f_start, Some(p), Some(m0)));
    }
    if t.scar.flag && t.descent_ok {
        loop {
            let l_next = l / 4.0;
            if l_next < l_min {
                break;
            }
            let next = d.trial(1, p - 1, x0, &g0, f_start, l_next, m)?;
            m = next.scar.m;
            if next.scar.flag && next.grad_norm <= epsilon {
                d.step(1, l_next, &next);
                return Ok(d.finish(next.point, next.grad_norm, f_start, Some(p - 1), Some(m0)));
            }
            if !(next.scar.flag && next.descent_ok) {
                break;
            }
            p -= 1;
            l = l_next;
            t = next;
        }
    } else {
        loop {
            p += 1;
            l *= 4.0;
            if l > l_max {
                return Err(Error::CurvatureSearchDiverged { l, cap: l_max });
            }
            t = d.trial(1, p, x0, &g0, f_start, l, m)?;
            m = t.scar.m;
            if t.scar.flag && t.grad_norm <= epsilon {
                d.step(1, l, &t);
                return Ok(d.finish(t.point, t.grad_norm, f_start, Some(p), Some(m0)));
            }
            if t.scar.flag && t.descent_ok {
                break;
            }
        }
    }
    let j1 = p;
    // The selected trial's M is the one carried forward.
    m = t.scar.m;
    d.step(1, l, &t);

    let mut x = t.point;
    let mut g = t.grad_f;
    let mut f = t.f_value;
    for i in 2..=MAX_OUTER {
        let mut p: i64 = 0;
        let mut l_try = l;
        loop {
            let t = d.trial(i, p, &x, &g, f, l_try, m)?;
            m = t.scar.m;
            let done = t.scar.flag && t.grad_norm <= epsilon;
            if done || (t.scar.flag && t.descent_ok) {
                d.step(i, l_try, &t);
                if done {
                    return Ok(d.finish(t.point, t.grad_norm, f_start, Some(j1), Some(m0)));
                }
                l = l_try;
                x = t.point;
                g = t.grad_f;
                f = t.f_value;
                break;
            }
            p += 1;
            l_try *= 4.0;
            if l_try > l_max {
                return Err(Error::CurvatureSearchDiverged {
                    l: l_try,
                    cap: l_max,
                });
            }
        }
    }
    Err(Error::NoProgress(MAX_OUTER as usize))
}
