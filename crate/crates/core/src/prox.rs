//! Feasible regions, composite prox steps and (perturbed) gradient mappings.
//!
//! For a region `X` with simple convex term `phi`, the perturbed gradient
//! mapping at `x` is
//!
//! ```text
//! x++(eta, sigma, xbar; x) = argmin_{u in X} <g, u> + phi(u)
//!                            + sigma/2 |u - xbar|^2 + eta/2 |u - x|^2
//! ```
//!
//! which reduces to `prox_{phi + I_X, sigma + eta}` applied to
//! `(sigma xbar + eta x - g) / (sigma + eta)`. Every built-in region has that
//! prox in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, require, Error, Result};
use crate::linalg::{dist, norm};

/// Membership tolerance for closed-form projections.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A closed convex set `X` together with a simple convex term `phi`.
pub trait FeasibleRegion {
    /// `argmin_{u in X} phi(u) + t/2 |u - v|^2` for `t > 0`.
    fn prox(&self, v: &[f64], t: f64) -> Vec<f64>;

    /// `phi(x)`; callers guarantee `x` lies in `X`.
    fn phi(&self, x: &[f64]) -> f64;

    fn contains(&self, x: &[f64]) -> bool;

    /// True when `X = R^n` and `phi = 0`, so that `G_eta(x) = grad f(x)`.
    fn is_trivial(&self) -> bool {
        false
    }

    /// Solves the composite prox subproblem defining `x++`.
    fn composite_prox(&self, g: &[f64], sigma: f64, xbar: &[f64], eta: f64, x: &[f64]) -> Vec<f64> {
        let t = sigma + eta;
        let v: Vec<f64> = g
            .iter()
            .zip(xbar)
            .zip(x)
            .map(|((gi, bi), xi)| (sigma * bi + eta * xi - gi) / t)
            .collect();
        self.prox(&v, t)
    }
}

/// Built-in regions with closed-form prox operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `X = R^n`, `phi = 0`.
    Unconstrained,
    /// Axis-aligned box `lower <= x <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Euclidean ball `|x - center| <= radius`.
    Ball { center: Vec<f64>, radius: f64 },
    /// `X = R^n`, `phi = lambda |x|_1`.
    L1 { lambda: f64 },
}

impl Default for Region {
    fn default() -> Self {
        Region::Unconstrained
    }
}

impl Region {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        require(lower.iter().zip(&upper).all(|(l, u)| l < u), || {
            "box requires lower < upper componentwise".into()
        })?;
        Ok(Region::Box { lower, upper })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        require(radius > 0.0, || {
            format!("ball radius must be positive, got {radius}")
        })?;
        Ok(Region::Ball { center, radius })
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        require(lambda >= 0.0, || {
            format!("l1 weight must be nonnegative, got {lambda}")
        })?;
        Ok(Region::L1 { lambda })
    }

    /// Euclidean projection onto `X` (ignores `phi`).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Region::Unconstrained | Region::L1 { .. } => x.to_vec(),
            _ => self.prox(x, 1.0),
        }
    }
}

impl FeasibleRegion for Region {
    fn prox(&self, v: &[f64], t: f64) -> Vec<f64> {
        match self {
            Region::Unconstrained => v.to_vec(),
            Region::Box { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(vi, (lo, hi))| vi.clamp(*lo, *hi))
                .collect(),
            Region::Ball { center, radius } => {
                let d = dist(v, center);
                if d <= *radius {
                    v.to_vec()
                } else {
                    let s = radius / d;
                    v.iter()
                        .zip(center)
                        .map(|(vi, ci)| ci + s * (vi - ci))
                        .collect()
                }
            }
            Region::L1 { lambda } => {
                let thr = lambda / t;
                v.iter()
                    .map(|vi| vi.signum() * (vi.abs() - thr).max(0.0))
                    .collect()
            }
        }
    }

    fn phi(&self, x: &[f64]) -> f64 {
        match self {
            Region::L1 { lambda } => lambda * x.iter().map(|xi| xi.abs()).sum::<f64>(),
            _ => 0.0,
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Unconstrained | Region::L1 { .. } => x.iter().all(|xi| xi.is_finite()),
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(xi, (lo, hi))| *xi >= lo - MEMBERSHIP_TOL && *xi <= hi + MEMBERSHIP_TOL),
            Region::Ball { center, radius } => dist(x, center) <= radius + MEMBERSHIP_TOL,
        }
    }

    fn is_trivial(&self) -> bool {
        matches!(self, Region::Unconstrained)
            || matches!(self, Region::L1 { lambda } if *lambda == 0.0)
    }
}

/// `G_eta(x) = eta (x - x+(eta; x))` together with the `eta` it was computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGradient {
    pub eta: f64,
    pub vector: Vec<f64>,
}

impl ProjectedGradient {
    pub fn norm(&self) -> f64 {
        norm(&self.vector)
    }
}

fn check_mapping_args(grad: &[f64], x: &[f64], eta: f64, sigma: f64) -> Result<()> {
    check_dim(x.len(), grad.len())?;
    require(eta > 0.0 && eta.is_finite(), || {
        format!("eta must be positive and finite, got {eta}")
    })?;
    require(sigma >= 0.0 && sigma.is_finite(), || {
        format!("sigma must be nonnegative and finite, got {sigma}")
    })
}

fn finite_or_err(u: Vec<f64>) -> Result<Vec<f64>> {
    if u.iter().all(|ui| ui.is_finite()) {
        Ok(u)
    } else {
        Err(Error::NonFinite("composite prox"))
    }
}

/// `x++(eta, sigma, xbar; x)` given `grad = grad f(x)`.
pub fn perturbed_gradient_mapping(
    region: &dyn FeasibleRegion,
    grad: &[f64],
    eta: f64,
    sigma: f64,
    xbar: &[f64],
    x: &[f64],
) -> Result<Vec<f64>> {
    check_mapping_args(grad, x, eta, sigma)?;
    check_dim(x.len(), xbar.len())?;
    finite_or_err(region.composite_prox(grad, sigma, xbar, eta, x))
}

/// `x+(eta; x) = x++(eta, 0, x; x)`.
pub fn gradient_mapping(
    region: &dyn FeasibleRegion,
    grad: &[f64],
    eta: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    perturbed_gradient_mapping(region, grad, eta, 0.0, x, x)
}

/// `G_eta(x)`. Returns `grad` itself on trivial regions.
pub fn projected_gradient(
    region: &dyn FeasibleRegion,
    grad: &[f64],
    eta: f64,
    x: &[f64],
) -> Result<ProjectedGradient> {
    check_mapping_args(grad, x, eta, 0.0)?;
    if region.is_trivial() {
        return Ok(ProjectedGradient {
            eta,
            vector: grad.to_vec(),
        });
    }
    let xp = gradient_mapping(region, grad, eta, x)?;
    let vector = x.iter().zip(&xp).map(|(a, b)| eta * (a - b)).collect();
    Ok(ProjectedGradient { eta, vector })
}
