//! Test problems with ground truth.
//!
//! Every instance carries its starting point, the constants the solvers
//! would otherwise have to guess (smoothness `L`, strong convexity `mu`,
//! lower curvature `l`), the optimum when it is known, and where possible an
//! exact solver for the regularized subproblem
//! `min_{x in X} f(x) + sigma/2 |x - xbar|^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, require, Error, Result};
use crate::linalg::{dist, dot, norm, sub};
use crate::oracle::Objective;
use crate::prox::Region;

/// Number of Householder reflections composed into a seeded rotation.
const REFLECTIONS: usize = 6;

/// Relative tolerance below which a rotated shift coordinate counts as zero.
const RANGE_TOL: f64 = 1e-12;

/// Stopping tolerance of the reference box-constrained solver.
pub const REFERENCE_TOL: f64 = 1e-12;

const REFERENCE_MAX_ITERS: usize = 1_000_000;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive (`lo, hi > 0`).
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Seeded random unit vector, coordinates drawn uniformly from `[-1, 1]`.
pub fn seeded_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unit(&mut rng, n)
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

/// `f(x) = 1/2 x^T Q x - b^T x` with `Q = U diag(spectrum) U^T`.
///
/// `U` is a product of seeded Householder reflections, or the identity when
/// no seed is given, in which case `Q` is diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    spectrum: Vec<f64>,
    reflectors: Vec<Vec<f64>>,
    shift: Vec<f64>,
}

impl Quadratic {
    pub fn new(spectrum: Vec<f64>, shift: Vec<f64>, seed: Option<u64>) -> Result<Self> {
        let n = spectrum.len();
        require(n >= 1, || "spectrum must be nonempty".into())?;
        check_dim(n, shift.len())?;
        require(spectrum.iter().all(|&s| s >= 0.0 && s.is_finite()), || {
            "spectrum entries must be finite and nonnegative".into()
        })?;
        let reflectors = match seed {
            Some(seed) if n > 1 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..REFLECTIONS.min(n))
                    .map(|_| random_unit(&mut rng, n))
                    .collect()
            }
            _ => Vec::new(),
        };
        Ok(Self {
            spectrum,
            reflectors,
            shift,
        })
    }

    /// Quadratic with minimizer `x_star`, i.e. `b = Q x_star`.
    pub fn with_minimizer(spectrum: Vec<f64>, x_star: &[f64], seed: Option<u64>) -> Result<Self> {
        let mut q = Self::new(spectrum, vec![0.0; x_star.len()], seed)?;
        q.shift = q.apply(x_star);
        Ok(q)
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn is_diagonal(&self) -> bool {
        self.reflectors.is_empty()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `U x`.
    pub fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for v in self.reflectors.iter().rev() {
            reflect(v, &mut y);
        }
        y
    }

    /// `U^T x`.
    pub fn unrotate(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for v in &self.reflectors {
            reflect(v, &mut y);
        }
        y
    }

    /// `Q x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.unrotate(x);
        for (yi, s) in y.iter_mut().zip(&self.spectrum) {
            *yi *= s;
        }
        self.rotate(&y)
    }

    /// `(Q + sigma I)^{-1} rhs`, the minimum-norm solution when singular.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), rhs.len())?;
        let c = self.unrotate(rhs);
        let tol = RANGE_TOL * norm(rhs).max(1.0);
        let mut y = Vec::with_capacity(c.len());
        for (ci, s) in c.iter().zip(&self.spectrum) {
            let d = s + sigma;
            if d > 0.0 {
                y.push(ci / d);
            } else if ci.abs() <= tol {
                y.push(0.0);
            } else {
                return Err(Error::NoFiniteMinimizer);
            }
        }
        Ok(self.rotate(&y))
    }

    /// Component of `x` orthogonal to the null space of `Q`.
    fn range_component(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.unrotate(x);
        for (yi, s) in y.iter_mut().zip(&self.spectrum) {
            if *s == 0.0 {
                *yi = 0.0;
            }
        }
        self.rotate(&y)
    }
}

fn reflect(v: &[f64], y: &mut [f64]) {
    let a = 2.0 * dot(v, y);
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= a * vi;
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.spectrum.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.apply(x)) - dot(&self.shift, x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let qx = self.apply(x);
        for ((o, q), b) in out.iter_mut().zip(qx).zip(&self.shift) {
            *o = q - b;
        }
    }
}

/// `f(x) = log(1 + e^x) + log(1 + e^-x)` on `R`.
///
/// Convex with `f'(x) = tanh(x/2)` and `f''(x) = sech^2(x/2) / 2 <= 1/2`,
/// but not strongly convex since `f''` vanishes at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Logistic1d;

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Objective for Logistic1d {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        softplus(x[0]) + softplus(-x[0])
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = (0.5 * x[0]).tanh();
    }
}

impl Logistic1d {
    /// Minimizer of `f(x) + sigma/2 (x - xbar)^2` by bisection on the
    /// increasing map `tanh(x/2) + sigma (x - xbar)`.
    pub fn subproblem_minimizer(sigma: f64, xbar: f64) -> f64 {
        let h = |x: f64| (0.5 * x).tanh() + sigma * (x - xbar);
        let (mut lo, mut hi) = (xbar - 1.0 / sigma, xbar + 1.0 / sigma);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `f(x) = 1/2 x^T Q x + c sum_i (1 - cos x_i)`, nonconvex when `c`
/// exceeds the smallest eigenvalue of `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosQuadratic {
    quadratic: Quadratic,
    c: f64,
}

impl CosQuadratic {
    pub fn new(spectrum: Vec<f64>, c: f64, seed: Option<u64>) -> Result<Self> {
        require(c > 0.0 && c.is_finite(), || {
            format!("c must be positive, got {c}")
        })?;
        let n = spectrum.len();
        Ok(Self {
            quadratic: Quadratic::new(spectrum, vec![0.0; n], seed)?,
            c,
        })
    }

    pub fn quadratic(&self) -> &Quadratic {
        &self.quadratic
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

impl Objective for CosQuadratic {
    fn dim(&self) -> usize {
        self.quadratic.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        // 1 - cos x = 2 sin^2(x/2) avoids cancellation near the minimum.
        self.quadratic.value(x)
            + 2.0 * self.c * x.iter().map(|xi| (0.5 * xi).sin().powi(2)).sum::<f64>()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.quadratic.gradient_into(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += self.c * xi.sin();
        }
    }
}

/// The objectives the factory can build.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Quadratic(Quadratic),
    Logistic(Logistic1d),
    CosQuadratic(CosQuadratic),
}

impl Objective for Problem {
    fn dim(&self) -> usize {
        match self {
            Problem::Quadratic(q) => q.dim(),
            Problem::Logistic(l) => l.dim(),
            Problem::CosQuadratic(c) => Objective::dim(c),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Problem::Quadratic(q) => q.value(x),
            Problem::Logistic(l) => l.value(x),
            Problem::CosQuadratic(c) => c.value(x),
        }
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Problem::Quadratic(q) => q.gradient_into(x, out),
            Problem::Logistic(l) => l.gradient_into(x, out),
            Problem::CosQuadratic(c) => c.gradient_into(x, out),
        }
    }
}

/// A test problem together with its known constants and optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub objective: Problem,
    pub region: Region,
    pub start: Vec<f64>,
    /// Lipschitz constant of `grad f`.
    pub lipschitz: f64,
    /// Strong convexity modulus (0 when not strongly convex).
    pub strong_convexity: f64,
    /// Smallest `l` with `f + l/2 |.|^2` convex.
    pub lower_curvature: f64,
    /// A minimizer over the region, when known.
    pub optimum: Option<Vec<f64>>,
    pub f_star: Option<f64>,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    /// Replaces the starting point, projecting it onto the region.
    pub fn with_start(mut self, start: Vec<f64>) -> Result<Self> {
        check_dim(self.dim(), start.len())?;
        self.start = self.region.project(&start);
        Ok(self)
    }

    /// `dist(x, X*)`, when the solution set is known.
    pub fn distance_to_optimum(&self, x: &[f64]) -> Option<f64> {
        let opt = self.optimum.as_ref()?;
        match (&self.objective, &self.region) {
            (Problem::Quadratic(q), Region::Unconstrained) => {
                Some(norm(&q.range_component(&sub(x, opt))))
            }
            _ => Some(dist(x, opt)),
        }
    }

    /// Exact minimizer of `f(x) + sigma/2 |x - xbar|^2` over the region.
    ///
    /// `None` when the instance has no subproblem oracle (nonconvex
    /// objectives). Rotated box-constrained quadratics are solved by a
    /// reference accelerated projected-gradient run to [`REFERENCE_TOL`].
    pub fn subproblem_minimizer(&self, sigma: f64, xbar: &[f64]) -> Option<Result<Vec<f64>>> {
        if let Err(e) = check_dim(self.dim(), xbar.len()) {
            return Some(Err(e));
        }
        if let Err(e) = require(sigma >= 0.0, || {
            format!("sigma must be nonnegative, got {sigma}")
        }) {
            return Some(Err(e));
        }
        match (&self.objective, &self.region) {
            (Problem::Quadratic(q), Region::Unconstrained) => {
                let rhs: Vec<f64> = q
                    .shift
                    .iter()
                    .zip(xbar)
                    .map(|(b, x)| b + sigma * x)
                    .collect();
                Some(q.solve_shifted(sigma, &rhs))
            }
            (Problem::Quadratic(q), Region::Box { lower, upper }) => {
                Some(box_quadratic_minimizer(q, sigma, xbar, lower, upper))
            }
            (Problem::Logistic(_), Region::Unconstrained) => {
                if sigma == 0.0 {
                    Some(Ok(vec![0.0]))
                } else {
                    Some(Ok(vec![Logistic1d::subproblem_minimizer(sigma, xbar[0])]))
                }
            }
            _ => None,
        }
    }
}

fn box_quadratic_minimizer(
    q: &Quadratic,
    sigma: f64,
    xbar: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = q
        .shift
        .iter()
        .zip(xbar)
        .map(|(b, x)| b + sigma * x)
        .collect();
    if q.is_diagonal() {
        return Ok(q
            .spectrum
            .iter()
            .zip(&rhs)
            .zip(lower.iter().zip(upper))
            .map(|((s, r), (lo, hi))| {
                let d = s + sigma;
                if d > 0.0 {
                    (r / d).clamp(*lo, *hi)
                } else if *r > 0.0 {
                    *hi
                } else if *r < 0.0 {
                    *lo
                } else {
                    0.0f64.clamp(*lo, *hi)
                }
            })
            .collect());
    }
    Ok(reference_box_qp(q, sigma, &rhs, lower, upper))
}

/// Accelerated projected gradient on `1/2 x^T (Q + sigma I) x - rhs^T x`
/// over a box, stopped when `|G_L(x)| <= REFERENCE_TOL max(1, |rhs|)`.
fn reference_box_qp(
    q: &Quadratic,
    sigma: f64,
    rhs: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Vec<f64> {
    let lip = q.max_eigenvalue() + sigma;
    let mu = q.min_eigenvalue() + sigma;
    let clamp = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .zip(lower.iter().zip(upper))
            .map(|(vi, (lo, hi))| vi.clamp(*lo, *hi))
            .collect()
    };
    let grad = |x: &[f64]| -> Vec<f64> {
        let qx = q.apply(x);
        qx.iter()
            .zip(x)
            .zip(rhs)
            .map(|((a, xi), r)| a + sigma * xi - r)
            .collect()
    };
    let tol = REFERENCE_TOL * norm(rhs).max(1.0);
    let momentum = if mu > 0.0 {
        let k = (lip / mu).sqrt();
        Some((k - 1.0) / (k + 1.0))
    } else {
        None
    };
    let mut x = clamp(vec![0.0; rhs.len()]);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..REFERENCE_MAX_ITERS {
        let gx = grad(&x);
        let step_x = clamp(x.iter().zip(&gx).map(|(a, g)| a - g / lip).collect());
        if lip * dist(&x, &step_x) <= tol {
            return x;
        }
        let gy = grad(&y);
        let next = clamp(y.iter().zip(&gy).map(|(a, g)| a - g / lip).collect());
        let beta = match momentum {
            Some(b) => b,
            None => {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let b = (t - 1.0) / t_next;
                t = t_next;
                b
            }
        };
        y = next
            .iter()
            .zip(&x)
            .map(|(n, o)| n + beta * (n - o))
            .collect();
        x = next;
    }
    x
}

/// `f(x) = 1/2 x^T Q x - b^T x` over `R^n`, started at the origin.
pub fn make_quadratic(
    spectrum: Vec<f64>,
    shift: Vec<f64>,
    seed: Option<u64>,
) -> Result<ProblemInstance> {
    let q = Quadratic::new(spectrum, shift, seed)?;
    let n = q.dim();
    let optimum = q.solve_shifted(0.0, &q.shift)?;
    let f_star = q.value(&optimum);
    Ok(ProblemInstance {
        name: "quadratic".into(),
        lipschitz: q.max_eigenvalue(),
        strong_convexity: q.min_eigenvalue(),
        lower_curvature: 0.0,
        optimum: Some(optimum),
        f_star: Some(f_star),
        start: vec![0.0; n],
        region: Region::Unconstrained,
        objective: Problem::Quadratic(q),
    })
}

/// Quadratic whose minimizer sits at distance `distance` from the origin
/// along a seeded direction.
pub fn make_centered_quadratic(
    spectrum: Vec<f64>,
    distance: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    require(distance >= 0.0, || {
        format!("distance must be nonnegative, got {distance}")
    })?;
    let n = spectrum.len();
    let x_star: Vec<f64> = seeded_unit(n, seed ^ 0x9e37_79b9_7f4a_7c15)
        .into_iter()
        .map(|u| distance * u)
        .collect();
    let q = Quadratic::with_minimizer(spectrum, &x_star, Some(seed))?;
    let shift = q.shift.clone();
    make_quadratic(q.spectrum.clone(), shift, Some(seed))
}

/// The quadratic of [`make_quadratic`] restricted to a box; starts at the
/// projection of the origin.
pub fn make_box_quadratic(
    spectrum: Vec<f64>,
    shift: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    seed: Option<u64>,
) -> Result<ProblemInstance> {
    let q = Quadratic::new(spectrum, shift, seed)?;
    check_dim(q.dim(), lower.len())?;
    let region = Region::boxed(lower, upper)?;
    let Region::Box { lower, upper } = &region else {
        unreachable!()
    };
    let optimum = box_quadratic_minimizer(&q, 0.0, &vec![0.0; q.dim()], lower, upper)?;
    let f_star = q.value(&optimum);
    let start = region.project(&vec![0.0; q.dim()]);
    Ok(ProblemInstance {
        name: "box_quadratic".into(),
        lipschitz: q.max_eigenvalue(),
        strong_convexity: q.min_eigenvalue(),
        lower_curvature: 0.0,
        optimum: Some(optimum),
        f_star: Some(f_star),
        start,
        region,
        objective: Problem::Quadratic(q),
    })
}

/// The one-dimensional logistic objective, started at `x = 3`.
pub fn make_logistic_1d() -> ProblemInstance {
    ProblemInstance {
        name: "logistic_1d".into(),
        objective: Problem::Logistic(Logistic1d),
        region: Region::Unconstrained,
        start: vec![3.0],
        lipschitz: 0.5,
        strong_convexity: 0.0,
        lower_curvature: 0.0,
        optimum: Some(vec![0.0]),
        f_star: Some(2.0 * std::f64::consts::LN_2),
    }
}

/// `1/2 x^T Q x + c sum(1 - cos x_i)`, started at `x = (1/2, ..., 1/2)`.
///
/// The recorded lower curvature is `c`, the recorded smoothness is
/// `max(spectrum) + c`, and the global minimum is `f(0) = 0`.
pub fn make_cos_quadratic(
    spectrum: Vec<f64>,
    c: f64,
    seed: Option<u64>,
) -> Result<ProblemInstance> {
    let f = CosQuadratic::new(spectrum, c, seed)?;
    let n = f.quadratic.dim();
    let lam_min = f.quadratic.min_eigenvalue();
    Ok(ProblemInstance {
        name: "cos_quadratic".into(),
        lipschitz: f.quadratic.max_eigenvalue() + c,
        strong_convexity: (lam_min - c).max(0.0),
        lower_curvature: c,
        optimum: Some(vec![0.0; n]),
        f_star: Some(0.0),
        start: vec![0.5; n],
        region: Region::Unconstrained,
        objective: Problem::CosQuadratic(f),
    })
}

/// Eigenvalue spacing for generated spectra.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    #[default]
    Quadratic,
    BoxQuadratic,
    Logistic1d,
    CosQuadratic,
}

/// Serializable instance descriptor.
///
/// Spectra come from `spectrum` if given, otherwise from `n` points between
/// `spectrum_min` and `spectrum_max`. Unconstrained quadratics place their
/// minimizer at distance `optimum_distance` from the origin; box quadratics
/// place the unconstrained minimizer there and clip to
/// `[box_lower, box_upper]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub problem: ProblemKind,
    pub n: usize,
    pub spectrum: Option<Vec<f64>>,
    pub spectrum_min: f64,
    pub spectrum_max: f64,
    pub spacing: Spacing,
    /// Rotate the spectrum with a seeded orthogonal matrix.
    pub rotate: bool,
    pub seed: u64,
    pub optimum_distance: f64,
    pub box_lower: f64,
    pub box_upper: f64,
    /// Cosine weight of the nonconvex instance.
    pub c: f64,
    /// Overrides the instance's default starting point.
    pub start: Option<Vec<f64>>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Quadratic,
            n: 2,
            spectrum: None,
            spectrum_min: 1.0,
            spectrum_max: 1.0,
            spacing: Spacing::Linear,
            rotate: true,
            seed: 0,
            optimum_distance: 1.0,
            box_lower: -1.0,
            box_upper: 1.0,
            c: 1.0,
            start: None,
        }
    }
}

impl ProblemSpec {
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        if let Some(s) = &self.spectrum {
            return Ok(s.clone());
        }
        require(self.n >= 1, || "n must be at least 1".into())?;
        require(
            self.spectrum_min >= 0.0 && self.spectrum_min <= self.spectrum_max,
            || "need 0 <= spectrum_min <= spectrum_max".into(),
        )?;
        Ok(match self.spacing {
            Spacing::Linear => linspace(self.spectrum_min, self.spectrum_max, self.n),
            Spacing::Geometric => {
                require(self.spectrum_min > 0.0, || {
                    "geometric spacing needs spectrum_min > 0".into()
                })?;
                geomspace(self.spectrum_min, self.spectrum_max, self.n)
            }
        })
    }

    pub fn build(&self) -> Result<ProblemInstance> {
        let seed = self.rotate.then_some(self.seed);
        let inst = match self.problem {
            ProblemKind::Quadratic => {
                let spectrum = self.spectrum()?;
                if self.rotate {
                    make_centered_quadratic(spectrum, self.optimum_distance, self.seed)?
                } else {
                    let n = spectrum.len();
                    let x_star: Vec<f64> = seeded_unit(n, self.seed ^ 0x9e37_79b9_7f4a_7c15)
                        .into_iter()
                        .map(|u| self.optimum_distance * u)
                        .collect();
                    let b: Vec<f64> = spectrum.iter().zip(&x_star).map(|(s, x)| s * x).collect();
                    make_quadratic(spectrum, b, None)?
                }
            }
            ProblemKind::BoxQuadratic => {
                let spectrum = self.spectrum()?;
                let n = spectrum.len();
                let x_star: Vec<f64> = seeded_unit(n, self.seed ^ 0x9e37_79b9_7f4a_7c15)
                    .into_iter()
                    .map(|u| self.optimum_distance * u)
                    .collect();
                let b = Quadratic::with_minimizer(spectrum.clone(), &x_star, seed)?.shift;
                make_box_quadratic(
                    spectrum,
                    b,
                    vec![self.box_lower; n],
                    vec![self.box_upper; n],
                    seed,
                )?
            }
            ProblemKind::Logistic1d => make_logistic_1d(),
            ProblemKind::CosQuadratic => make_cos_quadratic(self.spectrum()?, self.c, seed)?,
        };
        match &self.start {
            Some(s) => inst.with_start(s.clone()),
            None => Ok(inst),
        }
    }
}
