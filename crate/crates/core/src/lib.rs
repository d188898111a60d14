//! Gradient-norm minimization by accumulative regularization.
//!
//! The crate computes points with small (projected) gradient norm for smooth
//! convex, strongly convex and nonconvex problems, with every solver charging
//! its gradient evaluations to an [`EvalCounter`].
//!
//! * [`accumulative`]: fixed schedules for known `L` and distance bound `D`.
//! * [`adaptive`]: the parameter-free AR method and guess-and-check driver.
//! * [`strongly_convex`]: restarted AR (SCAR) for unknown `mu` and `L`.
//! * [`baseline`]: plain gradient descent for comparison.
//! * [`nonconvex`]: proximal-point drivers built on SCAR.
//! * [`problems`]: test instances with ground truth.

pub mod accumulative;
pub mod adaptive;
pub mod agd;
pub mod baseline;
pub mod error;
pub mod linalg;
pub mod nonconvex;
pub mod oracle;
pub mod problems;
pub mod prox;
pub mod report;
pub mod strongly_convex;

pub use accumulative::{
    build_schedule, run_fixed, update_prox_center, ArSchedule, FixedRun, StageState,
};
pub use adaptive::{
    ar, c1, estimate_initial_m, guess_and_check, local_line_search, ArOptions, ArResult,
    GuessAndCheckResult,
};
pub use agd::{
    solve_fixed_budget, solve_self_terminating, AgdOptions, Subproblem, SubroutineResult, C_A,
};
pub use baseline::gd_baseline;
pub use error::{Error, Result};
pub use nonconvex::{
    accept_step, nascar, run_fixed_nc, NonconvexRun, OuterStep, ProximalObjective, TrialRecord,
};
pub use oracle::{CachedPoint, EvalCounter, EvalSnapshot, FnObjective, Objective, Oracle};
pub use problems::{ProblemInstance, ProblemKind, ProblemSpec};
pub use prox::{
    gradient_mapping, perturbed_gradient_mapping, projected_gradient, FeasibleRegion,
    ProjectedGradient, Region,
};
pub use report::{SolverReport, TraceRow};
pub use strongly_convex::{scar, RefutePolicy, ScarOptions, ScarResult};
