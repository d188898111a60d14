//! Experiment runner for the gradnorm solvers: TOML configs in, trace CSV and
//! summary JSON out.

pub mod bounds;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod sweep;
