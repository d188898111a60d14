//! Shared fixtures for the solver benchmarks.

use gradnorm::problems::{ProblemKind, ProblemSpec, Spacing};
use gradnorm::ProblemInstance;

/// Rotated quadratic with spectrum in `[0.1, 1]` and `|x0 - x*| = 1`.
pub fn rotated_quadratic(n: usize) -> ProblemInstance {
    ProblemSpec {
        n,
        spectrum_min: 0.1,
        spectrum_max: 1.0,
        seed: 7,
        ..Default::default()
    }
    .build()
    .expect("valid descriptor")
}

/// Quadratic with condition number `kappa` and a geometric spectrum.
pub fn ill_conditioned(n: usize, kappa: f64) -> ProblemInstance {
    ProblemSpec {
        n,
        spectrum_min: 1.0 / kappa,
        spectrum_max: 1.0,
        spacing: Spacing::Geometric,
        seed: 11,
        ..Default::default()
    }
    .build()
    .expect("valid descriptor")
}

/// Diagonal quadratic whose unconstrained minimizer lies outside `[-0.5, 0.5]^n`.
pub fn box_quadratic(n: usize) -> ProblemInstance {
    ProblemSpec {
        problem: ProblemKind::BoxQuadratic,
        n,
        spectrum_min: 0.1,
        spectrum_max: 1.0,
        rotate: false,
        optimum_distance: 4.0,
        box_lower: -0.5,
        box_upper: 0.5,
        seed: 3,
        ..Default::default()
    }
    .build()
    .expect("valid descriptor")
}

/// `1/2 x^T Q x + sum(1 - cos x_i)` with `lambda_max(Q) = 9`.
pub fn cos_quadratic(n: usize) -> ProblemInstance {
    ProblemSpec {
        problem: ProblemKind::CosQuadratic,
        n,
        spectrum_min: 0.0,
        spectrum_max: 9.0,
        seed: 5,
        ..Default::default()
    }
    .build()
    .expect("valid descriptor")
}
