use std::fs;
use std::path::Path;

use wsrbench::cli::run_cli;
use wsrbench::studies::{sweep, SweepAxis};
use wsrbench::{ExperimentConfig, SeedSpec, SystemKind};
use wsrmax::solver::Algorithm;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("wsrbench").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn tiny(system: SystemKind) -> ExperimentConfig {
    ExperimentConfig {
        system,
        users: 2,
        antennas: 2,
        seeds: SeedSpec::List(vec![3]),
        solvers: vec![Algorithm::MmPlus],
        max_iters: 1,
        ..ExperimentConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, cfg.to_json_pretty()).unwrap();
    p.to_string_lossy().into_owned()
}

fn data_rows(csv: &Path) -> Vec<String> {
    fs::read_to_string(csv).unwrap().lines().skip(1).map(str::to_owned).collect()
}

#[test]
fn default_config_round_trips() {
    let cfg = ExperimentConfig::default();
    let back = ExperimentConfig::from_json(&cfg.to_json_pretty()).unwrap();
    assert_eq!(back.to_json_pretty(), cfg.to_json_pretty());
    back.validate().unwrap();
}

#[test]
fn validation_names_the_offending_field() {
    let bad = ExperimentConfig { weights: Some(vec![1.0, -1.0, 1.0, 1.0]), ..Default::default() };
    assert_eq!(bad.validate().unwrap_err().path, "weights[1]");

    let bad = ExperimentConfig { timing_repeats: 0, ..Default::default() };
    assert_eq!(bad.validate().unwrap_err().path, "timing_repeats");

    let bad = ExperimentConfig { users: 0, ..Default::default() };
    assert_eq!(bad.validate().unwrap_err().path, "users");

    let err = ExperimentConfig::from_json(r#"{"no_such_field": 1}"#).unwrap_err();
    assert!(err.message.contains("no_such_field"), "{err}");
}

#[test]
fn single_step_run_writes_baseline_and_one_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &tiny(SystemKind::Miso));
    let out = dir.path().join("out");
    let (code, _, err) = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let rows = data_rows(&out.join("trajectories.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("3,"));
    assert!(out.join("aggregate.json").exists());
}

#[test]
fn parallel_and_sequential_trajectories_match() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(SystemKind::Mimo);
    cfg.max_iters = 50;
    cfg.seeds = SeedSpec::Range { count: 3, base: 11 };
    cfg.solvers = vec![Algorithm::Mm, Algorithm::MmPlus];
    let cfg = write_config(dir.path(), &cfg);
    let strip = |p: &Path| -> Vec<String> {
        data_rows(p)
            .into_iter()
            .map(|r| {
                let mut f: Vec<&str> = r.split(',').collect();
                f.remove(5);
                f.join(",")
            })
            .collect()
    };
    let seq = dir.path().join("seq");
    let par = dir.path().join("par");
    assert_eq!(cli(&["run", "--config", &cfg, "--out", seq.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["run", "--config", &cfg, "--parallel", "--out", par.to_str().unwrap()]).0, 0);
    assert_eq!(strip(&seq.join("trajectories.csv")), strip(&par.join("trajectories.csv")));
}

#[test]
fn missing_config_is_a_usage_error() {
    let (code, _, err) = cli(&["run", "--config", "/nonexistent/cfg.json"]);
    assert_ne!(code, 0);
    assert!(!err.is_empty());
}

#[test]
fn verify_passes_and_force_fail_is_reported() {
    let (code, out, _) = cli(&["verify", "--seeds", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAILED"));

    let (code, out, _) = cli(&["verify", "--seeds", "1", "--force-fail"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAILED"));

    assert_eq!(cli(&["verify", "--seeds", "0"]).0, 2);
}

#[test]
fn sweep_validates_values() {
    let base = ExperimentConfig { seeds: SeedSpec::List(vec![0]), max_iters: 20, ..tiny(SystemKind::Miso) };
    let t = sweep(&base, SweepAxis::Antennas, &[3], false).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0].value, 3);
    assert!(sweep(&base, SweepAxis::Users, &[4, 2], false).is_err());
    assert!(sweep(&base, SweepAxis::Users, &[], false).is_err());
}

#[test]
fn sweep_command_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &ExperimentConfig { max_iters: 20, ..tiny(SystemKind::Miso) });
    let out = dir.path().join("o");
    let (code, _, err) =
        cli(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--axis", "users", "--values", "2,3"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(data_rows(&out.join("sweep_users.csv")).len(), 2);
}

#[test]
fn relaxed_bisection_requires_thresholds() {
    assert_eq!(cli(&["relaxed-bisection", "--thresholds"]).0, 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &ExperimentConfig { max_iters: 30, ..tiny(SystemKind::Miso) });
    let out = dir.path().join("o");
    let (code, _, err) =
        cli(&["relaxed-bisection", "--config", &cfg, "--out", out.to_str().unwrap(), "--thresholds", "4,40"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.join("relaxed_bisection.csv").exists());
    assert!(out.join("relaxed_summary.json").exists());
}

#[test]
fn print_default_config_parses() {
    let (code, out, _) = cli(&["print-default-config"]);
    assert_eq!(code, 0);
    ExperimentConfig::from_json(&out).unwrap().validate().unwrap();
}
