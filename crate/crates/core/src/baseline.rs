//! Plain (projected) gradient descent with step `1/L`, for comparison runs.

use crate::error::{check_dim, require, Result};
use crate::linalg::norm;
use crate::oracle::Oracle;
use crate::prox::{gradient_mapping, FeasibleRegion};
use crate::report::{SolverReport, TraceRow};

/// Runs `x <- x+(L; x)` until `|G_L(x)| <= epsilon` or `max_iters` steps.
///
/// One gradient evaluation per iteration. Trace rows are recorded every
/// `trace_every` iterations (0 disables them).
pub fn gd_baseline(
    oracle: &Oracle<'_>,
    region: &dyn FeasibleRegion,
    x0: &[f64],
    lipschitz: f64,
    epsilon: f64,
    max_iters: u64,
    trace_every: u64,
) -> Result<SolverReport> {
    check_dim(oracle.dim(), x0.len())?;
    require(lipschitz > 0.0 && lipschitz.is_finite(), || {
        format!("L must be positive and finite, got {lipschitz}")
    })?;
    require(epsilon > 0.0, || {
        format!("epsilon must be positive, got {epsilon}")
    })?;
    let counter = oracle.counter();
    let start = counter.snapshot();
    let mut x = x0.to_vec();
    let mut trace = Vec::new();
    let mut k = 0u64;
    loop {
        let g = oracle.gradient(&x)?;
        let next = gradient_mapping(region, &g, lipschitz, &x)?;
        let cert = if region.is_trivial() {
            norm(&g)
        } else {
            lipschitz * crate::linalg::dist(&x, &next)
        };
        if trace_every > 0 && k % trace_every == 0 {
            trace.push(TraceRow {
                index: k,
                parameter: lipschitz,
                grad_evals: start.gradient_delta(counter),
                grad_norm: Some(cert),
                value: None,
            });
        }
        if cert <= epsilon || k >= max_iters {
            return Ok(SolverReport {
                solution: x,
                grad_norm: cert,
                gradient_evals: start.gradient_delta(counter),
                value_evals: start.value_delta(counter),
                trace,
                converged: cert <= epsilon,
            });
        }
        x = next;
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::EvalCounter;
    use crate::problems::make_centered_quadratic;
    use crate::prox::Region;

    #[test]
    fn unit_quadratic_converges_in_one_step() {
        let p = make_centered_quadratic(vec![1.0; 4], 1.0, 2).unwrap();
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&p.objective, &counter);
        let r = gd_baseline(&oracle, &Region::Unconstrained, &p.start, 1.0, 1e-9, 100, 1).unwrap();
        assert!(r.converged);
        assert_eq!(r.gradient_evals, 2);
        assert_eq!(r.trace.len(), 2);
    }

    #[test]
    fn iteration_cap() {
        let p = make_centered_quadratic(vec![1e-3, 1.0], 1.0, 2).unwrap();
        let counter = EvalCounter::new();
        let oracle = Oracle::new(&p.objective, &counter);
        let r = gd_baseline(&oracle, &Region::Unconstrained, &p.start, 1.0, 1e-9, 10, 0).unwrap();
        assert!(!r.converged);
        assert_eq!(r.gradient_evals, 11);
        assert!(r.trace.is_empty());
    }
}
