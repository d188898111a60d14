//! Builds instances, dispatches solvers and attaches bound checks.

use std::cell::RefCell;
use std::time::Instant;

use gradnorm::adaptive::{ar, estimate_initial_m, guess_and_check, ArOptions};
use gradnorm::linalg::norm;
use gradnorm::nonconvex::{accept_step, nascar, run_fixed_nc, NonconvexRun};
use gradnorm::{
    build_schedule, gd_baseline, run_fixed, scar, EvalCounter, FeasibleRegion, Objective, Oracle,
    ProblemInstance, ScarOptions, SolverReport, TraceRow,
};
use serde_json::{json, Map, Value};

use crate::bounds::{self, BoundCheck, Constants};
use crate::config::{ExperimentConfig, Solver};
use crate::error::{CliError, Result};
use crate::output::{point_digest, ExperimentSummary, RunSummary, TraceRecord};

/// Records the elapsed time at every real gradient evaluation, keyed by the
/// counter value, so trace rows can be stamped after the fact.
struct Timed<'a> {
    inner: &'a dyn Objective,
    counter: &'a EvalCounter,
    start: Instant,
    stamps: RefCell<Vec<(u64, u64)>>,
}

impl Objective for Timed<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient_into(x, out);
        let ns = self.start.elapsed().as_nanos() as u64;
        self.stamps
            .borrow_mut()
            .push((self.counter.gradient_evals(), ns));
    }
}

impl Timed<'_> {
    fn stamp(&self, grad_evals: u64) -> u64 {
        let stamps = self.stamps.borrow();
        let i = stamps.partition_point(|&(c, _)| c <= grad_evals);
        if i == 0 {
            0
        } else {
            stamps[i - 1].1
        }
    }
}

/// What a solver run produced, before bookkeeping.
struct Outcome {
    report: SolverReport,
    f_value: Option<f64>,
    checks: Vec<BoundCheck>,
    details: Map<String, Value>,
}

/// Parameters resolved from the config and the instance.
struct Params<'a> {
    cfg: &'a ExperimentConfig,
    p: &'a ProblemInstance,
    epsilon: f64,
}

impl Params<'_> {
    fn lipschitz(&self) -> f64 {
        self.cfg.run.lipschitz.unwrap_or(self.p.lipschitz)
    }

    fn true_distance(&self) -> Option<f64> {
        self.p.distance_to_optimum(&self.p.start)
    }

    fn distance(&self) -> Result<f64> {
        self.cfg
            .run
            .distance
            .or_else(|| self.true_distance())
            .ok_or_else(|| {
                CliError::usage("`distance` is required: the instance has no known optimum")
            })
    }

    fn constrained(&self) -> bool {
        !self.p.region.is_trivial()
    }

    /// `f(x0) - f*` when `f*` is known.
    fn gap(&self) -> Option<f64> {
        self.p
            .f_star
            .map(|fs| self.p.objective.value(&self.p.start) - fs)
    }

    /// `|grad f(x0)|`, evaluated outside the counted oracle.
    fn grad0(&self) -> f64 {
        let mut g = vec![0.0; self.p.dim()];
        self.p.objective.gradient_into(&self.p.start, &mut g);
        norm(&g)
    }
}

fn certificate_check(name: &str, grad_norm: f64, epsilon: f64) -> BoundCheck {
    BoundCheck::at_most(format!("{name}: certificate"), grad_norm, epsilon)
}

fn shift_trace(trace: &mut [TraceRow], offset: u64) {
    for r in trace {
        r.grad_evals += offset;
    }
}

fn solve(oracle: &Oracle<'_>, prm: &Params<'_>) -> Result<Outcome> {
    let run = &prm.cfg.run;
    let p = prm.p;
    let eps = prm.epsilon;
    let checks_on = run.check_bounds;
    let mut checks = Vec::new();
    let mut details = Map::new();
    let mut f_value = None;

    let report = match run.solver {
        Solver::ArFixed => {
            let l = prm.lipschitz();
            let d = prm.distance()?;
            let schedule = build_schedule(l, d, eps, prm.constrained())?;
            let out = run_fixed(oracle, &p.region, &schedule, &p.start)?;
            details.insert("stages".into(), json!(schedule.stages()));
            details.insert("stage_budgets".into(), json!(schedule.budgets));
            details.insert("sigma".into(), json!(schedule.sigma));
            if checks_on {
                let what = if prm.constrained() {
                    "fixed schedule (constrained)"
                } else {
                    "fixed schedule"
                };
                checks.push(certificate_check(what, out.report.grad_norm, eps));
                let evals = out.report.gradient_evals as f64;
                checks.push(BoundCheck::at_most(
                    format!("{what}: gradient evaluations vs closed-form total"),
                    evals,
                    bounds::fixed_schedule_budget(l, d, eps),
                ));
                checks.push(BoundCheck::at_most(
                    format!("{what}: gradient evaluations vs sum over stages from sigma_1"),
                    evals,
                    1.0 + bounds::fixed_schedule_budget_from_sigma1(l, schedule.sigma[0]),
                ));
            }
            out.report
        }
        Solver::Ar => {
            let sigma1 = match run.sigma1 {
                Some(s) => s,
                None => eps / (5.0 * prm.distance()?),
            };
            let (m0, probe_evals, g0) = match run.m0 {
                Some(m0) => (m0, 0, None),
                None => {
                    let probe = estimate_initial_m(oracle, &p.start, None)?;
                    (
                        probe.m,
                        oracle.counter().gradient_evals(),
                        Some(probe.gradient_at_x0),
                    )
                }
            };
            let opts = ArOptions {
                region: &p.region,
                precheck_epsilon: eps,
                initial_gradient: g0,
            };
            let out = ar(oracle, &p.start, sigma1, m0, &opts)?;
            f_value = out.f_value;
            details.insert("sigma1".into(), json!(sigma1));
            details.insert("m0".into(), json!(m0));
            details.insert("m".into(), json!(out.m));
            details.insert("stages".into(), json!(out.stages_run));
            if checks_on {
                checks.push(BoundCheck::at_most(
                    "adaptive AR: gradient evaluations",
                    out.gradient_evals as f64,
                    bounds::ar_budget(out.m, m0, sigma1),
                ));
                if let Some(dist) = prm.true_distance() {
                    checks.push(BoundCheck::at_most(
                        "adaptive AR: gradient norm vs 5 sigma_1 dist(x0, X*)",
                        out.grad_norm,
                        bounds::ar_certificate(sigma1, dist),
                    ));
                }
            }
            if checks_on && run.sigma1.is_none() {
                checks.push(certificate_check("adaptive AR", out.grad_norm, eps));
            }
            let mut r = out.to_report();
            r.gradient_evals += probe_evals;
            shift_trace(&mut r.trace, probe_evals);
            r
        }
        Solver::GuessAndCheck => {
            let d0 = match run.d0 {
                Some(d) => d,
                None => prm.distance()?,
            };
            let out = guess_and_check(oracle, &p.start, d0, eps)?;
            details.insert("d0".into(), json!(d0));
            details.insert("m0".into(), json!(out.m0));
            details.insert("rounds".into(), json!(out.rounds.len()));
            if checks_on {
                checks.push(certificate_check("guess-and-check", out.grad_norm, eps));
                if let (Some(m0), Some(dist)) = (out.m0, prm.true_distance()) {
                    checks.push(BoundCheck::at_most(
                        "guess-and-check: gradient evaluations",
                        out.gradient_evals as f64,
                        bounds::guess_and_check_budget(
                            prm.lipschitz(),
                            m0,
                            out.rounds.len(),
                            d0,
                            dist,
                            eps,
                        ),
                    ));
                }
            }
            out.to_report()
        }
        Solver::Scar => {
            let opts = ScarOptions {
                mu0: run.mu0,
                m0: run.m0,
                refute_policy: run.refute_policy,
                initial_gradient: None,
            };
            let out = scar(oracle, eps, &p.start, &opts)?;
            f_value = out.f_value;
            details.insert("flag".into(), json!(out.flag));
            details.insert("m".into(), json!(out.m));
            details.insert("m0".into(), json!(out.m0));
            details.insert("mu0".into(), json!(out.mu0));
            details.insert("mu_final".into(), json!(out.mu_final));
            details.insert("restarts".into(), json!(out.restarts));
            details.insert("rounds".into(), json!(out.rounds.len()));
            if checks_on {
                if out.flag {
                    checks.push(certificate_check(
                        "strongly convex driver",
                        out.grad_norm,
                        eps,
                    ));
                }
                let evals = out.gradient_evals as f64;
                match (run.mu0, out.m0, out.mu0) {
                    (Some(mu0), Some(m0), _) => checks.push(BoundCheck::at_most(
                        "strongly convex driver (certification): gradient evaluations",
                        evals,
                        bounds::scar_certified_budget(out.m, m0, mu0, prm.grad0(), eps),
                    )),
                    (None, Some(m0), Some(mu0)) if p.strong_convexity > 0.0 => {
                        checks.push(BoundCheck::at_most(
                            "strongly convex driver: gradient evaluations",
                            evals,
                            bounds::scar_budget(
                                prm.lipschitz(),
                                p.strong_convexity,
                                m0,
                                mu0,
                                prm.grad0(),
                                eps,
                            ),
                        ))
                    }
                    _ => {}
                }
            }
            out.to_report()
        }
        Solver::RunFixedNc | Solver::Nascar => {
            let out: NonconvexRun = if run.solver == Solver::Nascar {
                nascar(oracle, &p.start, eps)?
            } else {
                let l = run.l.unwrap_or(p.lower_curvature);
                if !(l > 0.0) {
                    return Err(CliError::usage(
                        "`l` is required: the instance has no positive lower curvature",
                    ));
                }
                run_fixed_nc(oracle, &p.start, l, prm.lipschitz(), eps)?
            };
            f_value = out.outer.last().map(|s| s.f_value).or(Some(out.f_start));
            details.insert("outer_steps".into(), json!(out.outer.len()));
            details.insert("trials".into(), json!(out.trials.len()));
            details.insert("max_l".into(), json!(out.max_l()));
            details.insert("j1".into(), json!(out.j1));
            details.insert("m0".into(), json!(out.m0));
            if checks_on {
                nonconvex_checks(prm, run.solver, &out, &mut checks);
            }
            out.report
        }
        Solver::GdBaseline => {
            let r = gd_baseline(
                oracle,
                &p.region,
                &p.start,
                prm.lipschitz(),
                eps,
                run.max_iters,
                run.trace_every,
            )?;
            details.insert("comparison_only".into(), json!(true));
            r
        }
    };
    Ok(Outcome {
        report,
        f_value,
        checks,
        details,
    })
}

fn nonconvex_checks(
    prm: &Params<'_>,
    solver: Solver,
    out: &NonconvexRun,
    checks: &mut Vec<BoundCheck>,
) {
    let eps = prm.epsilon;
    let label = if solver == Solver::Nascar {
        "parameter-free nonconvex driver"
    } else {
        "fixed nonconvex driver"
    };
    checks.push(certificate_check(label, out.report.grad_norm, eps));

    // The descent test is only guaranteed while the gradient exceeds epsilon,
    // so the terminal step is exempt.
    let mut f_prev = out.f_start;
    let mut violations = 0;
    let last = out.outer.len().saturating_sub(1);
    for (i, s) in out.outer.iter().enumerate() {
        if i < last && !accept_step(s.l, f_prev, s.f_value, s.grad_norm) {
            violations += 1;
        }
        f_prev = s.f_value;
    }
    checks.push(BoundCheck::holds(
        format!("{label}: sufficient decrease on non-terminal outer steps"),
        violations,
    ));

    let (Some(gap), l_smooth) = (prm.gap(), prm.lipschitz()) else {
        return;
    };
    let evals = out.report.gradient_evals as f64;
    let non_terminal = last as f64;
    match solver {
        Solver::Nascar => {
            let decreases = out.outer.windows(2).filter(|w| w[1].l < w[0].l).count();
            checks.push(BoundCheck::holds(
                format!("{label}: curvature guesses nondecreasing after the initial search"),
                decreases,
            ));
            checks.push(BoundCheck::at_most(
                format!("{label}: non-terminal outer steps"),
                non_terminal,
                bounds::nascar_outer(out.max_l(), gap, eps),
            ));
            let l = prm.cfg.run.l.unwrap_or(prm.p.lower_curvature);
            if l > 0.0 {
                checks.push(BoundCheck::at_most(
                    format!("{label}: accepted curvature guesses vs 4 l"),
                    out.max_l(),
                    4.0 * l,
                ));
            }
            if let (Some(m0), Some(j1)) = (out.m0, out.j1) {
                if l > 0.0 {
                    checks.push(BoundCheck::at_most(
                        format!("{label}: gradient evaluations"),
                        evals,
                        bounds::nascar_budget(l_smooth, l, m0, j1, gap, prm.grad0(), eps),
                    ));
                }
            }
        }
        _ => {
            let l = prm.cfg.run.l.unwrap_or(prm.p.lower_curvature);
            checks.push(BoundCheck::at_most(
                format!("{label}: non-terminal outer steps"),
                non_terminal,
                bounds::nonconvex_outer(l, gap, eps),
            ));
            checks.push(BoundCheck::at_most(
                format!("{label}: gradient evaluations"),
                evals,
                bounds::nonconvex_budget(l_smooth, l, gap, prm.grad0(), eps),
            ));
        }
    }
}

/// One repetition of an experiment.
pub struct RunOutput {
    pub summary: RunSummary,
    pub trace: Vec<TraceRecord>,
}

/// Runs repetition `rep` (problem seed `seed + rep`) with tolerance `epsilon`.
pub fn run_once(
    cfg: &ExperimentConfig,
    epsilon: f64,
    rep: u32,
    run_id: String,
) -> Result<RunOutput> {
    let mut spec = cfg.problem.clone();
    spec.seed = spec.seed.wrapping_add(rep as u64);
    let p = spec
        .build()
        .map_err(|e| CliError::usage(format!("problem: {e}")))?;
    let counter = EvalCounter::new();
    let timed = Timed {
        inner: &p.objective,
        counter: &counter,
        start: Instant::now(),
        stamps: RefCell::new(Vec::new()),
    };
    let oracle = Oracle::new(&timed, &counter);
    let prm = Params {
        cfg,
        p: &p,
        epsilon,
    };
    let out = solve(&oracle, &prm)?;
    let wall_ns = timed.start.elapsed().as_nanos() as u64;

    let mut checks = out.checks;
    let drift = out.report.gradient_evals.abs_diff(counter.gradient_evals())
        + out.report.value_evals.abs_diff(counter.value_evals());
    checks.push(BoundCheck::holds(
        "ledger: reported evaluations equal the oracle counter",
        drift as usize,
    ));

    let solver = cfg.run.solver.name();
    let trace = out
        .report
        .trace
        .iter()
        .map(|r| TraceRecord {
            run_id: run_id.clone(),
            solver: solver.to_string(),
            index: r.index,
            parameter: r.parameter,
            grad_evals: r.grad_evals,
            grad_norm: r.grad_norm,
            f_value: r.value,
            wall_ns: if cfg.run.record_timing {
                timed.stamp(r.grad_evals)
            } else {
                0
            },
        })
        .collect();

    let x = &out.report.solution;
    let summary = RunSummary {
        run_id,
        seed: spec.seed,
        point_digest: point_digest(x),
        point_norm: norm(x),
        grad_norm: out.report.grad_norm,
        f_value: out.f_value,
        gradient_evals: counter.gradient_evals(),
        value_evals: counter.value_evals(),
        wall_ns,
        converged: out.report.converged,
        checks,
        details: out.details,
    };
    Ok(RunOutput { summary, trace })
}

/// All repetitions of one experiment at tolerance `epsilon`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    epsilon: f64,
    stem: &str,
) -> Result<(ExperimentSummary, Vec<TraceRecord>)> {
    let mut runs = Vec::new();
    let mut trace = Vec::new();
    for rep in 0..cfg.run.repetitions {
        let out = run_once(cfg, epsilon, rep, format!("{stem}-{rep}"))?;
        runs.push(out.summary);
        trace.extend(out.trace);
    }
    let mut config = cfg.clone();
    config.run.epsilon = epsilon;
    let summary = ExperimentSummary {
        name: stem.to_string(),
        solver: cfg.run.solver.name().to_string(),
        epsilon,
        config,
        constants: Constants::default(),
        success: runs.iter().all(RunSummary::success),
        runs,
    };
    Ok((summary, trace))
}
