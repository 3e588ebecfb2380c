//! Experiment harness for the `wsrmax` solvers: JSON-configured runs over
//! seeded channel realizations, CSV trajectories, aggregates, timing sweeps
//! and the relaxed multiplier-search study.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod studies;

pub use config::{ConfigError, ExperimentConfig, SeedSpec, SystemKind};
pub use experiment::{aggregate, run_experiment, run_seed, AggregateResult, RunResult};
