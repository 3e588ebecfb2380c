//! Convergence-time sweeps and the relaxed multiplier-search study.

use serde::{Deserialize, Serialize};
use wsrmax::lagrange::BisectionSettings;
use wsrmax::solver::Algorithm;

use crate::config::{ConfigError, ExperimentConfig};
use crate::experiment::{run_experiment_with, RunResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Users,
    Antennas,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub mm_mean_seconds: f64,
    pub mm_plus_mean_seconds: f64,
    pub mm_mean_iterations: f64,
    pub mm_plus_mean_iterations: f64,
    pub mm_mean_final_wsr: f64,
    pub mm_plus_mean_final_wsr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

fn mean_of(runs: &[RunResult], alg: Algorithm, f: impl Fn(&RunResult) -> f64) -> f64 {
    let xs: Vec<f64> = runs.iter().filter(|r| r.algorithm == alg).map(f).collect();
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// Mean convergence time of WSR-MM and WSR-MM+ at each axis value; all other
/// parameters come from `base`. `values` must be nonempty and ascending.
pub fn sweep(base: &ExperimentConfig, axis: SweepAxis, values: &[usize], parallel: bool) -> anyhow::Result<SweepTable> {
    if values.is_empty() {
        return Err(ConfigError::new("values", "at least one value is required").into());
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(ConfigError::new("values", "must be sorted ascending").into());
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut cfg = base.clone();
        match axis {
            SweepAxis::Users => cfg.users = v,
            SweepAxis::Antennas => cfg.antennas = v,
        }
        cfg.weights = None;
        cfg.solvers = vec![Algorithm::Mm, Algorithm::MmPlus];
        cfg.validate()?;
        let solvers = [cfg.solver_config(Algorithm::Mm), cfg.solver_config(Algorithm::MmPlus)];
        let runs = run_experiment_with(&cfg, &solvers, parallel)?;
        let (mm, mp) = (Algorithm::Mm, Algorithm::MmPlus);
        rows.push(SweepRow {
            value: v,
            mm_mean_seconds: mean_of(&runs, mm, RunResult::seconds),
            mm_plus_mean_seconds: mean_of(&runs, mp, RunResult::seconds),
            mm_mean_iterations: mean_of(&runs, mm, |r| r.iterations() as f64),
            mm_plus_mean_iterations: mean_of(&runs, mp, |r| r.iterations() as f64),
            mm_mean_final_wsr: mean_of(&runs, mm, RunResult::final_wsr),
            mm_plus_mean_final_wsr: mean_of(&runs, mp, RunResult::final_wsr),
        });
    }
    Ok(SweepTable { axis, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedTrajectory {
    /// `Some(i)` for a search stopped at width `2^{-i}`; `None` for the
    /// exact-tolerance WSR-MM reference.
    pub threshold: Option<u32>,
    pub seed: u64,
    pub wsr: Vec<f64>,
    pub max_decrease: f64,
    /// Reference final WSR minus this run's final WSR.
    pub shortfall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub threshold: u32,
    /// Seeds with a decrease above the monotonicity tolerance.
    pub non_monotone_seeds: usize,
    /// Seeds with `shortfall > 1e-3`.
    pub shortfall_seeds: usize,
    /// Seeds with either.
    pub affected_seeds: usize,
    pub max_abs_final_diff: f64,
    pub seeds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxedStudy {
    pub trajectories: Vec<RelaxedTrajectory>,
    /// Per-seed WSR-MM+ trajectories run alongside as a reference.
    pub mm_plus: Vec<RelaxedTrajectory>,
    pub summaries: Vec<ThresholdSummary>,
}

pub const MONOTONE_TOL: f64 = 1e-8;
pub const SHORTFALL_TOL: f64 = 1e-3;

/// WSR-MM with the multiplier search stopped once its bracket is narrower
/// than `2^{-i}`, for each `i`, next to the exact-tolerance run.
pub fn relaxed_bisection(base: &ExperimentConfig, thresholds: &[u32], parallel: bool) -> anyhow::Result<RelaxedStudy> {
    if thresholds.is_empty() {
        return Err(ConfigError::new("thresholds", "at least one threshold is required").into());
    }
    let mut cfg = base.clone();
    cfg.solvers = vec![Algorithm::Mm, Algorithm::MmPlus];
    cfg.validate()?;
    let mut solvers = vec![cfg.solver_config(Algorithm::Mm), cfg.solver_config(Algorithm::MmPlus)];
    for &i in thresholds {
        solvers.push(cfg.solver_config(Algorithm::Mm).with_bisection(BisectionSettings::relaxed(i)));
    }
    let runs = run_experiment_with(&cfg, &solvers, parallel)?;

    let per_seed = solvers.len();
    let mut trajectories = Vec::new();
    let mut mm_plus = Vec::new();
    for chunk in runs.chunks(per_seed) {
        let exact = &chunk[0];
        let reference = exact.final_wsr();
        let make = |threshold, r: &RunResult| RelaxedTrajectory {
            threshold,
            seed: r.seed,
            wsr: r.records.iter().map(|x| x.wsr).collect(),
            max_decrease: r.max_decrease(),
            shortfall: reference - r.final_wsr(),
        };
        trajectories.push(make(None, exact));
        mm_plus.push(make(None, &chunk[1]));
        for (i, r) in thresholds.iter().zip(&chunk[2..]) {
            trajectories.push(make(Some(*i), r));
        }
    }
    let summaries = thresholds
        .iter()
        .map(|&i| {
            let rows: Vec<&RelaxedTrajectory> = trajectories.iter().filter(|t| t.threshold == Some(i)).collect();
            let nm = |t: &RelaxedTrajectory| t.max_decrease > MONOTONE_TOL;
            let sf = |t: &RelaxedTrajectory| t.shortfall > SHORTFALL_TOL;
            ThresholdSummary {
                threshold: i,
                non_monotone_seeds: rows.iter().filter(|t| nm(t)).count(),
                shortfall_seeds: rows.iter().filter(|t| sf(t)).count(),
                affected_seeds: rows.iter().filter(|t| nm(t) || sf(t)).count(),
                max_abs_final_diff: rows.iter().map(|t| t.shortfall.abs()).fold(0.0, f64::max),
                seeds: rows.len(),
            }
        })
        .collect();
    Ok(RelaxedStudy { trajectories, mm_plus, summaries })
}
