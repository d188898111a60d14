//! Experiment configuration: a flat TOML table.
//!
//! Keys listed in [`RUN_KEYS`] configure the run; every other key belongs to
//! the problem descriptor and is checked against [`ProblemSpec`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gradnorm::{ProblemSpec, RefutePolicy};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Solver {
    ArFixed,
    Ar,
    GuessAndCheck,
    Scar,
    Nascar,
    RunFixedNc,
    GdBaseline,
}

impl Solver {
    pub const ALL: [Solver; 7] = [
        Solver::ArFixed,
        Solver::Ar,
        Solver::GuessAndCheck,
        Solver::Scar,
        Solver::Nascar,
        Solver::RunFixedNc,
        Solver::GdBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::ArFixed => "ar_fixed",
            Solver::Ar => "ar",
            Solver::GuessAndCheck => "guess_and_check",
            Solver::Scar => "scar",
            Solver::Nascar => "nascar",
            Solver::RunFixedNc => "run_fixed_nc",
            Solver::GdBaseline => "gd_baseline",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| CliError::usage(format!("unknown solver `{s}`")))
    }
}

/// Run settings. Optional parameters default to the instance's known values
/// where a solver needs them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    /// Prefix of the output files; defaults to the config file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub solver: Solver,
    pub epsilon: f64,
    /// Smoothness constant `L`.
    #[serde(default)]
    pub lipschitz: Option<f64>,
    /// Distance bound `D >= dist(x0, X*)`.
    #[serde(default)]
    pub distance: Option<f64>,
    /// Strong convexity guess to certify (strongly convex driver).
    #[serde(default)]
    pub mu0: Option<f64>,
    /// Initial curvature estimate; probed when absent.
    #[serde(default)]
    pub m0: Option<f64>,
    /// Lower curvature constant for the fixed nonconvex driver.
    #[serde(default)]
    pub l: Option<f64>,
    /// First regularization weight of the adaptive driver; `epsilon / (5 D)`
    /// when absent.
    #[serde(default)]
    pub sigma1: Option<f64>,
    /// Initial distance guess of guess-and-check; `D` when absent.
    #[serde(default)]
    pub d0: Option<f64>,
    #[serde(default)]
    pub refute_policy: RefutePolicy,
    /// Iteration cap of the gradient-descent baseline.
    #[serde(default = "default_max_iters")]
    pub max_iters: u64,
    /// Trace stride of the gradient-descent baseline.
    #[serde(default = "default_trace_every")]
    pub trace_every: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Fill the `wall_ns` trace column; off by default so traces are
    /// byte-stable across reruns.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default = "default_true")]
    pub check_bounds: bool,
}

fn default_max_iters() -> u64 {
    1_000_000
}

fn default_trace_every() -> u64 {
    100
}

fn default_repetitions() -> u32 {
    1
}

fn default_true() -> bool {
    true
}

pub const RUN_KEYS: [&str; 17] = [
    "name",
    "solver",
    "epsilon",
    "lipschitz",
    "distance",
    "mu0",
    "m0",
    "l",
    "sigma1",
    "d0",
    "refute_policy",
    "max_iters",
    "trace_every",
    "repetitions",
    "out",
    "record_timing",
    "check_bounds",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub run: RunSettings,
    pub problem: ProblemSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))?;
        let (run, problem): (toml::Table, toml::Table) = table
            .into_iter()
            .partition(|(k, _)| RUN_KEYS.contains(&k.as_str()));
        let run: RunSettings = run
            .try_into()
            .map_err(|e| CliError::usage(format!("config: {e}")))?;
        let problem: ProblemSpec = problem
            .try_into()
            .map_err(|e| CliError::usage(format!("config: {e}")))?;
        let cfg = Self { run, problem };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; the run name defaults to the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if cfg.run.name.is_none() {
            cfg.run.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        let positive = |name: &str, v: Option<f64>| match v {
            Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::usage(format!(
                "{name} must be positive and finite, got {v}"
            ))),
            _ => Ok(()),
        };
        positive("epsilon", Some(r.epsilon))?;
        positive("lipschitz", r.lipschitz)?;
        positive("distance", r.distance)?;
        positive("mu0", r.mu0)?;
        positive("m0", r.m0)?;
        positive("l", r.l)?;
        positive("sigma1", r.sigma1)?;
        positive("d0", r.d0)?;
        if r.repetitions == 0 {
            return Err(CliError::usage("repetitions must be at least 1"));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        self.run.name.as_deref().unwrap_or("run")
    }

    /// Output directory: `GRADNORM_OUT`, then the configured path, then
    /// `gradnorm-out`.
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os("GRADNORM_OUT") {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self
                .run
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("gradnorm-out")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gradnorm::ProblemKind;

    #[test]
    fn flat_table_splits_into_run_and_problem() {
        let cfg = ExperimentConfig::parse(
            r#"
            solver = "scar"
            epsilon = 1e-6
            mu0 = 0.5
            problem = "quadratic"
            n = 5
            spectrum_min = 0.1
            seed = 9
            "#,
        )
        .unwrap();
        assert_eq!(cfg.run.solver, Solver::Scar);
        assert_eq!(cfg.run.mu0, Some(0.5));
        assert_eq!(cfg.run.repetitions, 1);
        assert!(cfg.run.check_bounds);
        assert_eq!(cfg.problem.problem, ProblemKind::Quadratic);
        assert_eq!(cfg.problem.n, 5);
        assert_eq!(cfg.problem.seed, 9);
    }

    #[test]
    fn unknown_keys_and_names_are_usage_errors() {
        for text in [
            "solver = \"newton\"\nepsilon = 1.0",
            "solver = \"ar\"\nepsilon = 1.0\nspectrum_mn = 0.1",
            "solver = \"ar\"\nepsilon = 1.0\nproblem = \"rosenbrock\"",
            "solver = \"ar\"\nepsilon = -1.0",
            "solver = \"ar\"",
        ] {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn solver_names_round_trip() {
        for s in Solver::ALL {
            assert_eq!(s.name().parse::<Solver>().unwrap(), s);
        }
        assert!("sgd".parse::<Solver>().is_err());
    }
}
