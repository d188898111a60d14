//! Closed-form complexity and certificate bounds, and the pass/fail rows
//! that compare them with observed runs.
//!
//! Logarithms of ratios that fall below one are clamped at zero: they count
//! halvings or doublings that never need to happen.

use serde::Serialize;

/// Curvature growth factor of the accelerated subroutine, `L_s <= c_A L`.
pub const C_A: f64 = gradnorm::C_A;

/// `C_1 = 3 + 16 sqrt(2 c_A)`.
pub fn c1() -> f64 {
    gradnorm::c1()
}

/// Constants recorded in every summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub c_a: f64,
    pub c1: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c_a: C_A, c1: c1() }
    }
}

/// One comparison `observed <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    /// What is being bounded, e.g. "fixed schedule: gradient evaluations".
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
}

impl BoundCheck {
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            bound,
            observed,
            pass: observed <= bound,
        }
    }

    /// A property that either holds everywhere (`violations == 0`) or not.
    pub fn holds(name: impl Into<String>, violations: usize) -> Self {
        Self::at_most(name, violations as f64, 0.0)
    }
}

fn log2_pos(x: f64) -> f64 {
    x.log2().max(0.0)
}

/// Evaluation budget of the fixed schedule as printed:
/// `2 (1 + 8 sqrt(2 c_A)) sqrt(L D / epsilon)`.
pub fn fixed_schedule_budget(l: f64, d: f64, epsilon: f64) -> f64 {
    2.0 * (1.0 + 8.0 * (2.0 * C_A).sqrt()) * (l * d / epsilon).sqrt()
}

/// The same geometric-sum argument carried out with the schedule's first
/// weight `sigma_1`: `2 (1 + 8 sqrt(2 c_A)) sqrt(L / sigma_1)`.
pub fn fixed_schedule_budget_from_sigma1(l: f64, sigma1: f64) -> f64 {
    2.0 * (1.0 + 8.0 * (2.0 * C_A).sqrt()) * (l / sigma1).sqrt()
}

/// Adaptive AR evaluations: `4 + log2(M / M0) + C_1 sqrt(M / sigma_1)`.
pub fn ar_budget(m: f64, m0: f64, sigma1: f64) -> f64 {
    4.0 + log2_pos(m / m0) + c1() * (m / sigma1).sqrt()
}

/// Adaptive AR certificate: `5 sigma_1 dist(x0, X*)`.
pub fn ar_certificate(sigma1: f64, dist: f64) -> f64 {
    5.0 * sigma1 * dist
}

/// Guess-and-check evaluations after `rounds` rounds:
/// `2 + (5 + log2(L / M0)) T + 2 C_1 sqrt(10 L max(D0, 4 dist) / epsilon)`.
pub fn guess_and_check_budget(
    l: f64,
    m0: f64,
    rounds: usize,
    d0: f64,
    dist: f64,
    epsilon: f64,
) -> f64 {
    2.0 + (5.0 + log2_pos(l / m0)) * rounds as f64
        + 2.0 * c1() * (10.0 * l * d0.max(4.0 * dist) / epsilon).sqrt()
}

/// Parameter-free strongly convex driver evaluations:
/// `2 + 2 C_1 + log2(L / M0) + 8 C_1 ceil(log4(mu0 / mu)) sqrt(5 L / mu)
///  + 8 C_1 sqrt(5 L / mu) log2(|grad f(y0)| / epsilon)`.
pub fn scar_budget(l: f64, mu: f64, m0: f64, mu0: f64, grad0: f64, epsilon: f64) -> f64 {
    let c = c1();
    let root = (5.0 * l / mu).sqrt();
    let restarts = (mu0 / mu).log(4.0).ceil().max(0.0);
    2.0 + 2.0 * c
        + log2_pos(l / m0)
        + 8.0 * c * restarts * root
        + 8.0 * c * root * log2_pos(grad0 / epsilon)
}

/// Certification-mode evaluations with a supplied `mu0`:
/// `6 + log2(M / M0) + (4 + 2 C_1 sqrt(10 M / mu0)) log2(|grad f(y0)| / epsilon)`.
pub fn scar_certified_budget(m: f64, m0: f64, mu0: f64, grad0: f64, epsilon: f64) -> f64 {
    6.0 + log2_pos(m / m0)
        + (4.0 + 2.0 * c1() * (10.0 * m / mu0).sqrt()) * log2_pos(grad0 / epsilon)
}

/// Fixed nonconvex driver evaluations:
/// `6 + 60 (3 + sqrt(30) C_1) sqrt(L l) Delta / epsilon^2
///  + 6 (2 + sqrt(30) C_1) sqrt(L / l) log2(|grad f(x0)| / epsilon)`.
pub fn nonconvex_budget(l_smooth: f64, l: f64, gap: f64, grad0: f64, epsilon: f64) -> f64 {
    let k = 30f64.sqrt() * c1();
    6.0 + 60.0 * (3.0 + k) * (l_smooth * l).sqrt() * gap / (epsilon * epsilon)
        + 6.0 * (2.0 + k) * (l_smooth / l).sqrt() * log2_pos(grad0 / epsilon)
}

/// Outer steps of the fixed nonconvex driver: `ceil(10 l Delta / epsilon^2)`.
pub fn nonconvex_outer(l: f64, gap: f64, epsilon: f64) -> f64 {
    (10.0 * l * gap / (epsilon * epsilon)).ceil()
}

/// Outer steps of the parameter-free nonconvex driver:
/// `ceil(40 l_max Delta / epsilon^2)`.
pub fn nascar_outer(l_max: f64, gap: f64, epsilon: f64) -> f64 {
    (40.0 * l_max * gap / (epsilon * epsilon)).ceil()
}

/// Parameter-free nonconvex driver evaluations:
/// `6 + 12 |j1| + log2(6 L / M0) + 2 (C_1 + 2) sqrt(60 L / M0) log2(|grad f(x0)| / epsilon)
///  + 320 (C_1 + 2) sqrt(5 L l) Delta / epsilon^2`.
pub fn nascar_budget(
    l_smooth: f64,
    l: f64,
    m0: f64,
    j1: i64,
    gap: f64,
    grad0: f64,
    epsilon: f64,
) -> f64 {
    let c = c1() + 2.0;
    6.0 + 12.0 * j1.unsigned_abs() as f64
        + log2_pos(6.0 * l_smooth / m0)
        + 2.0 * c * (60.0 * l_smooth / m0).sqrt() * log2_pos(grad0 / epsilon)
        + 320.0 * c * (5.0 * l_smooth * l).sqrt() * gap / (epsilon * epsilon)
}
