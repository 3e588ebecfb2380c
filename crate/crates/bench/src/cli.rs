//! Command-line front end. Exit status: 0 success, 1 failed run or
//! identity, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use wsrmax::calculus::EtaMode;
use wsrmax::equivalence::{run_suite, SuiteConfig};

use crate::config::{ConfigError, ExperimentConfig, SeedSpec};
use crate::experiment::{aggregate, run_experiment, write_trajectories};
use crate::studies::{relaxed_bisection, sweep, SweepAxis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EtaArg {
    Exact,
    Frobenius,
}

impl From<EtaArg> for EtaMode {
    fn from(a: EtaArg) -> Self {
        match a {
            EtaArg::Exact => EtaMode::ExactLambdaMax,
            EtaArg::Frobenius => EtaMode::FrobeniusBound,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wsrbench", about = "Weighted sum-rate solver experiments")]
pub struct Cli {
    /// JSON experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of seeds, counted from the config's base seed.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Process seeds in parallel; numeric output is unchanged.
    #[arg(long, global = true)]
    parallel: bool,
    #[arg(long, global = true, value_enum)]
    eta_mode: Option<EtaArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every configured solver on every seed.
    Run,
    /// Run the identity suite and print one JSON report per line.
    Verify {
        #[arg(long, default_value_t = 4)]
        users: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Perturb one map by 1e-3 so the suite must fail.
        #[arg(long)]
        force_fail: bool,
    },
    /// Convergence time of WSR-MM and WSR-MM+ along one axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// WSR-MM with the multiplier search stopped at width 2^-i.
    RelaxedBisection {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        thresholds: Vec<u32>,
    },
    /// Print the built-in configuration as JSON
    PrintDefaultConfig,
}

fn usage(path: &str, message: &str) -> anyhow::Error {
    ConfigError::new(path, message).into()
}

impl Cli {
    fn load_config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| usage("--config", &format!("{}: {e}", p.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(n) = self.seeds {
            let base = match cfg.seeds {
                SeedSpec::Range { base, .. } => base,
                SeedSpec::List(ref v) => v.first().copied().unwrap_or(0),
            };
            cfg.seeds = SeedSpec::Range { count: n, base };
        }
        if let Some(m) = self.eta_mode {
            cfg.eta_mode = m.into();
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let cfg = cli.load_config()?;
    let runs = run_experiment(&cfg, cli.parallel)?;
    create_dir(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join("trajectories.csv");
    write_trajectories(&runs, fs::File::create(&csv_path)?)?;
    let agg = aggregate(&runs);
    fs::write(cfg.output_dir.join("aggregate.json"), serde_json::to_string_pretty(&agg)?)?;
    writeln!(out, "solver,variant,mean_final_wsr,mean_iterations,mean_seconds")?;
    for s in &agg.solvers {
        writeln!(out, "{},{},{:.6},{:.1},{:.3e}", s.solver, s.variant, s.mean_final_wsr, s.mean_iterations, s.mean_seconds)?;
    }
    for s in &agg.solvers {
        for f in &s.failures {
            writeln!(out, "failure {}/{} seed {f}", s.solver, s.variant)?;
        }
    }
    Ok(if agg.has_failures() { EXIT_FAILURE } else { EXIT_OK })
}

fn cmd_verify(cli: &Cli, users: usize, dim: usize, force_fail: bool, out: &mut dyn Write) -> anyhow::Result<i32> {
    let count = cli.seeds.unwrap_or(5);
    if count == 0 {
        return Err(usage("--seeds", "at least one seed is required"));
    }
    let suite = SuiteConfig {
        num_users: users,
        dim,
        eta_mode: cli.eta_mode.map_or(EtaMode::FrobeniusBound, Into::into),
        force_fail,
        ..SuiteConfig::default()
    };
    suite.validate().map_err(|e| usage("--users/--dim", &e.to_string()))?;
    let seeds: Vec<u64> = (0..count as u64).collect();
    let reports = run_suite(&seeds, &suite)?;
    for r in &reports {
        writeln!(out, "{}", r.to_json_line())?;
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        writeln!(out, "FAILED {} seed {:?}: {:e} > {:e}", r.identity, r.seed, r.discrepancy, r.tolerance)?;
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_sweep(cli: &Cli, axis: SweepAxis, values: &[usize], out: &mut dyn Write) -> anyhow::Result<i32> {
    let cfg = cli.load_config()?;
    let table = sweep(&cfg, axis, values, cli.parallel)?;
    create_dir(&cfg.output_dir)?;
    let name = match axis {
        SweepAxis::Users => "users",
        SweepAxis::Antennas => "antennas",
    };
    let mut w = csv::Writer::from_path(cfg.output_dir.join(format!("sweep_{name}.csv")))?;
    for row in &table.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    writeln!(out, "{name},mm_seconds,mm_plus_seconds,mm_iters,mm_plus_iters")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{:.3e},{:.3e},{:.1},{:.1}",
            r.value, r.mm_mean_seconds, r.mm_plus_mean_seconds, r.mm_mean_iterations, r.mm_plus_mean_iterations
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_relaxed(cli: &Cli, thresholds: &[u32], out: &mut dyn Write) -> anyhow::Result<i32> {
    if thresholds.is_empty() {
        return Err(usage("--thresholds", "at least one threshold is required"));
    }
    let cfg = cli.load_config()?;
    let study = relaxed_bisection(&cfg, thresholds, cli.parallel)?;
    create_dir(&cfg.output_dir)?;
    let mut w = csv::Writer::from_path(cfg.output_dir.join("relaxed_bisection.csv"))?;
    w.write_record(["threshold", "seed", "iter", "wsr_nats"])?;
    let labelled = study
        .trajectories
        .iter()
        .map(|t| (t.threshold.map_or("exact".to_string(), |i| i.to_string()), t))
        .chain(study.mm_plus.iter().map(|t| ("mm_plus".to_string(), t)));
    for (label, t) in labelled {
        for (i, v) in t.wsr.iter().enumerate() {
            w.write_record([label.clone(), t.seed.to_string(), i.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    fs::write(cfg.output_dir.join("relaxed_summary.json"), serde_json::to_string_pretty(&study.summaries)?)?;
    writeln!(out, "threshold,seeds,non_monotone,shortfall,affected,max_abs_final_diff")?;
    for s in &study.summaries {
        writeln!(
            out,
            "{},{},{},{},{},{:.3e}",
            s.threshold, s.seeds, s.non_monotone_seeds, s.shortfall_seeds, s.affected_seeds, s.max_abs_final_diff
        )?;
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Run => cmd_run(cli, out),
        Command::Verify { users, dim, force_fail } => cmd_verify(cli, *users, *dim, *force_fail, out),
        Command::Sweep { axis, values } => cmd_sweep(cli, *axis, values, out),
        Command::RelaxedBisection { thresholds } => cmd_relaxed(cli, thresholds, out),
        Command::PrintDefaultConfig => {
            writeln!(out, "{}", ExperimentConfig::default().to_json_pretty())?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Diagnostics go to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}
