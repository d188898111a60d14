//! Every driver reports exactly the oracle work it caused.
//!
//! Each run starts on a counter that already holds unrelated evaluations, so
//! reports must use deltas. Real calls reaching the objective are counted
//! separately: values must match the counter exactly, and gradients may only
//! exceed real calls by the failed backtracking trials the drivers charge.

use std::cell::Cell;

use gradnorm::accumulative::{build_schedule, run_fixed};
use gradnorm::adaptive::{ar, guess_and_check, ArOptions};
use gradnorm::agd::{solve_fixed_budget, solve_self_terminating, AgdOptions, Subproblem};
use gradnorm::baseline::gd_baseline;
use gradnorm::nonconvex::{nascar, run_fixed_nc};
use gradnorm::problems::{linspace, make_cos_quadratic, ProblemInstance, ProblemKind, ProblemSpec};
use gradnorm::strongly_convex::{scar, ScarOptions};
use gradnorm::{EvalCounter, Objective, Oracle, Region, SolverReport};

struct Tally<'a> {
    inner: &'a dyn Objective,
    values: Cell<u64>,
    gradients: Cell<u64>,
}

impl<'a> Tally<'a> {
    fn new(inner: &'a dyn Objective) -> Self {
        Self {
            inner,
            values: Cell::new(0),
            gradients: Cell::new(0),
        }
    }
}

impl Objective for Tally<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.values.set(self.values.get() + 1);
        self.inner.value(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.gradients.set(self.gradients.get() + 1);
        self.inner.gradient_into(x, out)
    }
}

const PRELOAD: u64 = 7;

/// Runs `solve` on a preloaded counter and checks the report against both
/// the counter and the real calls.
fn audit<F>(p: &ProblemInstance, solve: F)
where
    F: FnOnce(&Oracle<'_>) -> SolverReport,
{
    let tally = Tally::new(&p.objective);
    let counter = EvalCounter::new();
    let oracle = Oracle::new(&tally, &counter);
    for _ in 0..PRELOAD {
        oracle.gradient(&p.start).unwrap();
        oracle.value(&p.start).unwrap();
    }
    let report = solve(&oracle);
    let grads = counter.gradient_evals() - PRELOAD;
    let values = counter.value_evals() - PRELOAD;
    assert_eq!(report.gradient_evals, grads, "{}: gradient ledger", p.name);
    assert_eq!(report.value_evals, values, "{}: value ledger", p.name);
    assert_eq!(
        tally.values.get() - PRELOAD,
        values,
        "{}: real values",
        p.name
    );
    assert!(
        tally.gradients.get() - PRELOAD <= grads,
        "{}: real gradients",
        p.name
    );
    let mut last = 0;
    for row in &report.trace {
        assert!(
            row.grad_evals >= last && row.grad_evals <= grads,
            "{}: trace",
            p.name
        );
        last = row.grad_evals;
    }
}

fn quadratic() -> ProblemInstance {
    ProblemSpec {
        n: 10,
        spectrum_min: 0.01,
        spectrum_max: 1.0,
        seed: 2,
        ..Default::default()
    }
    .build()
    .unwrap()
}

fn boxed() -> ProblemInstance {
    ProblemSpec {
        problem: ProblemKind::BoxQuadratic,
        n: 6,
        spectrum_min: 0.0,
        spectrum_max: 1.0,
        seed: 5,
        optimum_distance: 3.0,
        ..Default::default()
    }
    .build()
    .unwrap()
}

fn nonconvex() -> ProblemInstance {
    make_cos_quadratic(linspace(0.1, 1.0, 4), 1.0, Some(3)).unwrap()
}

#[test]
fn fixed_schedule() {
    for p in [quadratic(), boxed()] {
        let constrained = !matches!(p.region, Region::Unconstrained);
        let d = p.distance_to_optimum(&p.start).unwrap();
        let s = build_schedule(p.lipschitz, d, 1e-4, constrained).unwrap();
        audit(&p, |o| {
            run_fixed(o, &p.region, &s, &p.start).unwrap().report
        });
    }
}

#[test]
fn subroutines() {
    let p = quadratic();
    let xbar = vec![0.5; p.dim()];
    let sp = Subproblem::new(&p.region, 0.05, &xbar);
    // Subroutine results carry gradient counts only.
    let tally = Tally::new(&p.objective);
    let counter = EvalCounter::new();
    let oracle = Oracle::new(&tally, &counter);
    let r = solve_fixed_budget(
        &oracle,
        &sp,
        &p.start,
        50,
        p.lipschitz,
        &AgdOptions::default(),
    )
    .unwrap();
    assert_eq!(r.evals_used, counter.gradient_evals());
    let before = counter.gradient_evals();
    let r = solve_self_terminating(&oracle, &sp, &p.start, 1e-3, &AgdOptions::default()).unwrap();
    assert!(r.failed_trials > 0);
    assert_eq!(r.evals_used, counter.gradient_evals() - before);
    assert_eq!(
        tally.gradients.get() + r.failed_trials,
        counter.gradient_evals(),
        "failed trials are the only charged evaluations"
    );
}

#[test]
fn adaptive_drivers() {
    for p in [quadratic(), boxed()] {
        let opts = ArOptions {
            region: &p.region,
            ..Default::default()
        };
        audit(&p, |o| {
            ar(o, &p.start, 1e-3, 1e-2, &opts).unwrap().to_report()
        });
    }
    let p = quadratic();
    audit(&p, |o| {
        guess_and_check(o, &p.start, 1e-3, 1e-5)
            .unwrap()
            .to_report()
    });
}

#[test]
fn strongly_convex_driver() {
    let p = quadratic();
    audit(&p, |o| {
        scar(o, 1e-6, &p.start, &ScarOptions::default())
            .unwrap()
            .to_report()
    });
    let opts = ScarOptions {
        mu0: Some(0.01),
        m0: Some(0.1),
        ..Default::default()
    };
    audit(&p, |o| scar(o, 1e-6, &p.start, &opts).unwrap().to_report());
    let wrong = ScarOptions {
        mu0: Some(0.5),
        ..Default::default()
    };
    audit(&p, |o| scar(o, 1e-8, &p.start, &wrong).unwrap().to_report());
}

#[test]
fn nonconvex_drivers() {
    let p = nonconvex();
    audit(&p, |o| {
        run_fixed_nc(o, &p.start, p.lower_curvature, p.lipschitz, 1e-4)
            .unwrap()
            .report
    });
    audit(&p, |o| nascar(o, &p.start, 1e-4).unwrap().report);
}

#[test]
fn baseline() {
    for p in [quadratic(), boxed()] {
        audit(&p, |o| {
            gd_baseline(o, &p.region, &p.start, p.lipschitz, 1e-4, 100_000, 100).unwrap()
        });
    }
}
