use thiserror::Error;

/// Errors raised by the oracles, regions and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("oracle produced NaN/Inf ({0})")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schedule not strictly increasing: sigma_prev = {prev}, sigma_next = {next}")]
    ScheduleNotIncreasing { prev: f64, next: f64 },

    #[error("objective not smooth at iterate: backtracking exceeded {0} doublings")]
    NotSmooth(u32),

    #[error("gradient locally constant: every secant probe returned zero ({0} probes)")]
    GradientLocallyConstant(usize),

    #[error("distance guess diverged after {0} rounds")]
    DistanceGuessDiverged(usize),

    #[error("no progress after {0} restarts")]
    NoProgress(usize),

    #[error("curvature model violated: inner solve refuted strong convexity with l = {0}")]
    CurvatureModelViolated(f64),

    #[error("curvature search diverged: l = {l} exceeds cap {cap}")]
    CurvatureSearchDiverged { l: f64, cap: f64 },

    #[error("no finite minimizer")]
    NoFiniteMinimizer,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}
