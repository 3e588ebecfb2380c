//! Seeded solver runs, trajectory CSV output and aggregation.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wsrmax::solver::{Algorithm, IterRecord, SolverConfig, Trajectory};
use wsrmax::system_model::{random_init_mimo, random_init_miso, MimoScenario, MisoScenario};
use wsrmax::{mimo, miso};

use crate::config::{ExperimentConfig, SystemKind};

/// Column order of the trajectory CSV.
pub const CSV_HEADER: [&str; 7] = ["seed", "solver", "variant", "iter", "wsr_nats", "cum_seconds", "mu_iters"];

/// Points on the cumulative-time axis of the aggregate.
const TIME_GRID: usize = 50;

#[derive(Clone, Debug)]
pub struct RunResult {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub records: Vec<IterRecord>,
    pub converged: bool,
    pub error: Option<String>,
}

impl RunResult {
    fn from_trajectory<B>(seed: u64, algorithm: Algorithm, t: Trajectory<B>) -> Self {
        Self { seed, algorithm, records: t.records, converged: t.converged, error: t.error.map(|e| e.to_string()) }
    }

    pub fn final_wsr(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.wsr)
    }

    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn seconds(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative_seconds)
    }

    pub fn max_decrease(&self) -> f64 {
        self.records.windows(2).map(|w| w[0].wsr - w[1].wsr).fold(0.0, f64::max)
    }
}

/// One untimed step to fault in caches and allocations before the timed run.
fn warm_up_miso(scn: &MisoScenario, cfg: &SolverConfig, init: &wsrmax::system_model::MisoBeamformers) {
    let _ = miso::step(scn, init, cfg.algorithm, None, cfg);
}

fn warm_up_mimo(scn: &MimoScenario, cfg: &SolverConfig, init: &wsrmax::system_model::MimoBeamformers) {
    let _ = mimo::step_mimo(scn, init, cfg.algorithm, cfg);
}

/// Fastest of `repeats` runs; every repetition yields the same trajectory.
fn fastest<B>(repeats: usize, mut run: impl FnMut() -> wsrmax::Result<Trajectory<B>>) -> wsrmax::Result<Trajectory<B>> {
    let mut best = run()?;
    for _ in 1..repeats {
        let t = run()?;
        if t.total_seconds() < best.total_seconds() {
            best = t;
        }
    }
    Ok(best)
}

/// Runs `solvers` from one shared initialization of the instance for `seed`.
pub fn run_seed_with(cfg: &ExperimentConfig, seed: u64, solvers: &[SolverConfig]) -> wsrmax::Result<Vec<RunResult>> {
    let mut out = Vec::with_capacity(solvers.len());
    match cfg.system {
        SystemKind::Miso => {
            let scn = cfg.miso_scenario(seed)?;
            let init = random_init_miso(&scn, seed);
            for s in solvers {
                warm_up_miso(&scn, s, &init);
                let t = fastest(cfg.timing_repeats, || miso::run(&scn, s, &init))?;
                out.push(RunResult::from_trajectory(seed, s.algorithm, t));
            }
        }
        SystemKind::Mimo => {
            let scn = cfg.mimo_scenario(seed)?;
            let init = random_init_mimo(&scn, seed);
            for s in solvers {
                warm_up_mimo(&scn, s, &init);
                let t = fastest(cfg.timing_repeats, || mimo::run_mimo(&scn, s, &init))?;
                out.push(RunResult::from_trajectory(seed, s.algorithm, t));
            }
        }
    }
    Ok(out)
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> wsrmax::Result<Vec<RunResult>> {
    let solvers: Vec<SolverConfig> = cfg.solvers.iter().map(|a| cfg.solver_config(*a)).collect();
    run_seed_with(cfg, seed, &solvers)
}

/// Runs over all seeds; results are ordered by seed, then solver, whether or
/// not seeds are processed in parallel.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    solvers: &[SolverConfig],
    parallel: bool,
) -> wsrmax::Result<Vec<RunResult>> {
    let seeds = cfg.seeds.seeds();
    let per_seed: Vec<wsrmax::Result<Vec<RunResult>>> = if parallel {
        seeds.par_iter().map(|s| run_seed_with(cfg, *s, solvers)).collect()
    } else {
        seeds.iter().map(|s| run_seed_with(cfg, *s, solvers)).collect()
    };
    let mut out = Vec::new();
    for r in per_seed {
        out.extend(r?);
    }
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig, parallel: bool) -> wsrmax::Result<Vec<RunResult>> {
    let solvers: Vec<SolverConfig> = cfg.solvers.iter().map(|a| cfg.solver_config(*a)).collect();
    run_experiment_with(cfg, &solvers, parallel)
}

/// Writes every iteration record of every run, header first.
pub fn write_trajectories<W: Write>(runs: &[RunResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for run in runs {
        for r in &run.records {
            w.write_record([
                run.seed.to_string(),
                run.algorithm.name().to_string(),
                run.algorithm.variant_name().to_string(),
                r.iter.to_string(),
                r.wsr.to_string(),
                r.cumulative_seconds.to_string(),
                r.mu_iters.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFinal {
    pub seed: u64,
    pub final_wsr: f64,
    pub iterations: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverAggregate {
    pub solver: String,
    pub variant: String,
    /// Mean WSR at each iteration; finished runs carry their last value.
    pub mean_wsr_by_iter: Vec<f64>,
    /// `(seconds, mean WSR)` on a uniform grid up to the slowest run.
    pub mean_wsr_by_time: Vec<(f64, f64)>,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub mean_iterations: f64,
    pub mean_final_wsr: f64,
    pub per_seed: Vec<SeedFinal>,
    /// Runs that stopped on a step error, as `seed: message`.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub solvers: Vec<SolverAggregate>,
}

impl AggregateResult {
    pub fn get(&self, algorithm: Algorithm) -> Option<&SolverAggregate> {
        self.solvers
            .iter()
            .find(|s| s.solver == algorithm.name() && s.variant == algorithm.variant_name())
    }

    pub fn has_failures(&self) -> bool {
        self.solvers.iter().any(|s| !s.failures.is_empty())
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// WSR of the last record completed by time `t`.
fn wsr_at_time(records: &[IterRecord], t: f64) -> f64 {
    let idx = records.partition_point(|r| r.cumulative_seconds <= t);
    records[idx.saturating_sub(1)].wsr
}

fn aggregate_solver(algorithm: Algorithm, runs: &[&RunResult]) -> SolverAggregate {
    let len = runs.iter().map(|r| r.records.len()).max().unwrap_or(0);
    let mean_wsr_by_iter = (0..len)
        .map(|i| mean(runs.iter().map(|r| r.records[i.min(r.records.len() - 1)].wsr)))
        .collect();
    let t_max = runs.iter().map(|r| r.seconds()).fold(0.0, f64::max);
    let mean_wsr_by_time = (0..=TIME_GRID)
        .map(|g| {
            let t = t_max * g as f64 / TIME_GRID as f64;
            (t, mean(runs.iter().map(|r| wsr_at_time(&r.records, t))))
        })
        .collect();
    let mean_seconds = mean(runs.iter().map(|r| r.seconds()));
    let var = mean(runs.iter().map(|r| (r.seconds() - mean_seconds).powi(2)));
    SolverAggregate {
        solver: algorithm.name().into(),
        variant: algorithm.variant_name().into(),
        mean_wsr_by_iter,
        mean_wsr_by_time,
        mean_seconds,
        std_seconds: var.sqrt(),
        mean_iterations: mean(runs.iter().map(|r| r.iterations() as f64)),
        mean_final_wsr: mean(runs.iter().map(|r| r.final_wsr())),
        per_seed: runs
            .iter()
            .map(|r| SeedFinal { seed: r.seed, final_wsr: r.final_wsr(), iterations: r.iterations(), seconds: r.seconds() })
            .collect(),
        failures: runs
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.seed)))
            .collect(),
    }
}

/// Groups runs by solver, in first-appearance order.
pub fn aggregate(runs: &[RunResult]) -> AggregateResult {
    let mut order: Vec<Algorithm> = Vec::new();
    for r in runs {
        if !order.contains(&r.algorithm) {
            order.push(r.algorithm);
        }
    }
    let solvers = order
        .into_iter()
        .map(|a| {
            let group: Vec<&RunResult> = runs.iter().filter(|r| r.algorithm == a).collect();
            aggregate_solver(a, &group)
        })
        .collect();
    AggregateResult { solvers }
}
