//! Black-box objectives and gradient-evaluation accounting.
//!
//! Every complexity statement in this crate is measured in calls to the
//! gradient oracle. [`Oracle`] pairs an [`Objective`] with an [`EvalCounter`]
//! and is the only path through which solvers touch the objective, so the
//! counter delta over a run is the run's exact cost.

use std::cell::Cell;
use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::linalg::all_finite;

/// A smooth objective `f: R^n -> R` with a value and a gradient oracle.
///
/// Implementations must be deterministic: the same input yields bitwise
/// identical output within a run.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes `grad f(x)` into `out` (`out.len() == self.dim()`).
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient_into(x, out)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient_into(x, out)
    }
}

/// Objective assembled from two closures.
pub struct FnObjective<F, G> {
    dim: usize,
    value: F,
    gradient: G,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self {
            dim,
            value,
            gradient,
        }
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }
}

/// Monotone counts of oracle calls for one run.
///
/// Interior mutability lets several [`Oracle`] views (e.g. the objective and
/// a proximal wrapper around it) share one ledger. The counter is not `Sync`:
/// it belongs to a single run.
#[derive(Debug, Default)]
pub struct EvalCounter {
    gradient: Cell<u64>,
    value: Cell<u64>,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn gradient_evals(&self) -> u64 {
        self.gradient.get()
    }

    pub fn value_evals(&self) -> u64 {
        self.value.get()
    }

    pub fn snapshot(&self) -> EvalSnapshot {
        EvalSnapshot {
            gradient: self.gradient_evals(),
            value: self.value_evals(),
        }
    }

    fn bump_gradient(&self) {
        self.gradient.set(self.gradient.get() + 1);
    }

    fn bump_value(&self) {
        self.value.set(self.value.get() + 1);
    }
}

/// Point-in-time copy of an [`EvalCounter`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalSnapshot {
    pub gradient: u64,
    pub value: u64,
}

impl EvalSnapshot {
    /// Gradient evaluations charged since `self` was taken.
    pub fn gradient_delta(&self, counter: &EvalCounter) -> u64 {
        counter.gradient_evals() - self.gradient
    }

    pub fn value_delta(&self, counter: &EvalCounter) -> u64 {
        counter.value_evals() - self.value
    }
}

/// A point together with oracle outputs already paid for at that point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CachedPoint {
    pub point: Vec<f64>,
    pub value: Option<f64>,
    pub gradient: Option<Vec<f64>>,
}

impl CachedPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_gradient(point: Vec<f64>, gradient: Vec<f64>) -> Self {
        Self {
            point,
            value: None,
            gradient: Some(gradient),
        }
    }

    fn holds(&self, x: &[f64]) -> bool {
        self.point.as_slice() == x
    }
}

/// Counting view of an objective.
#[derive(Clone, Copy)]
pub struct Oracle<'a> {
    objective: &'a dyn Objective,
    counter: &'a EvalCounter,
}

impl fmt::Debug for Oracle<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("dim", &self.objective.dim())
            .field("counter", self.counter)
            .finish()
    }
}

impl<'a> Oracle<'a> {
    pub fn new(objective: &'a dyn Objective, counter: &'a EvalCounter) -> Self {
        Self { objective, counter }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn objective(&self) -> &'a dyn Objective {
        self.objective
    }

    pub fn counter(&self) -> &'a EvalCounter {
        self.counter
    }

    /// `f(x)`; charges one value evaluation.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        self.counter.bump_value();
        let v = self.objective.value(x);
        if !v.is_finite() {
            return Err(Error::NonFinite("value oracle"));
        }
        Ok(v)
    }

    /// `grad f(x)`; charges one gradient evaluation.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        self.counter.bump_gradient();
        let mut g = vec![0.0; self.dim()];
        self.objective.gradient_into(x, &mut g);
        if !all_finite(&g) {
            return Err(Error::NonFinite("gradient oracle"));
        }
        Ok(g)
    }

    /// Charges one gradient evaluation without calling the oracle.
    ///
    /// Backtracking trials that only need function values are billed this
    /// way so the ledger over-approximates the gradient count.
    pub fn charge_gradient(&self) {
        self.counter.bump_gradient();
    }

    /// `grad f(x)`, served from `cache` when it already holds `x`.
    pub fn cached_gradient(&self, cache: &mut CachedPoint, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        if cache.holds(x) {
            if let Some(g) = &cache.gradient {
                return Ok(g.clone());
            }
            let g = self.gradient(x)?;
            cache.gradient = Some(g.clone());
            return Ok(g);
        }
        let g = self.gradient(x)?;
        *cache = CachedPoint::with_gradient(x.to_vec(), g.clone());
        Ok(g)
    }

    /// `f(x)`, served from `cache` when it already holds `x`.
    pub fn cached_value(&self, cache: &mut CachedPoint, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if cache.holds(x) {
            if let Some(v) = cache.value {
                return Ok(v);
            }
            let v = self.value(x)?;
            cache.value = Some(v);
            return Ok(v);
        }
        let v = self.value(x)?;
        *cache = CachedPoint {
            point: x.to_vec(),
            value: Some(v),
            gradient: None,
        };
        Ok(v)
    }
}
