//! Experiment configuration, loaded from JSON.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wsrmax::calculus::EtaMode;
use wsrmax::lagrange::BisectionSettings;
use wsrmax::solver::{Algorithm, SolverConfig};
use wsrmax::system_model::{
    dbm_to_linear, generate_mimo, generate_miso, GeometryConfig, LinkDims, MimoScenario, MisoScenario,
};

/// Invalid configuration; `path` names the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Miso,
    Mimo,
}

/// Either an explicit list or `count` consecutive seeds from `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range {
        count: usize,
        #[serde(default)]
        base: u64,
    },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range { count, base } => (0..*count as u64).map(|i| base + i).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub system: SystemKind,
    /// `K`: users (MISO) or links (MIMO).
    pub users: usize,
    /// Transmit antennas: `M` for MISO, per transmitter for MIMO.
    pub antennas: usize,
    /// MIMO receive antennas per link; defaults to `antennas`.
    pub rx_antennas: Option<usize>,
    /// MIMO streams per link; defaults to `min(antennas, rx_antennas)`.
    pub streams: Option<usize>,
    /// Total (MISO) or per-link (MIMO) transmit power.
    pub power_dbm: f64,
    /// Defaults to all ones.
    pub weights: Option<Vec<f64>>,
    /// Receiver noise variance, relative to the geometry's noise floor.
    pub noise_variance: f64,
    pub geometry: GeometryConfig,
    pub solvers: Vec<Algorithm>,
    pub seeds: SeedSpec,
    pub stop_epsilon: f64,
    pub max_iters: usize,
    pub bisection: BisectionSettings,
    pub eta_mode: EtaMode,
    /// Each run is repeated this many times and the fastest repetition's
    /// timings are kept; trajectories are identical across repetitions.
    pub timing_repeats: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemKind::Miso,
            users: 4,
            antennas: 4,
            rx_antennas: None,
            streams: None,
            power_dbm: 0.0,
            weights: None,
            noise_variance: 1.0,
            geometry: GeometryConfig::default(),
            solvers: Algorithm::families().to_vec(),
            seeds: SeedSpec::Range { count: 100, base: 0 },
            stop_epsilon: 1e-6,
            max_iters: 10_000,
            bisection: BisectionSettings::exact(),
            eta_mode: EtaMode::FrobeniusBound,
            timing_repeats: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn positive(path: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be positive and finite, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::new("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.users == 0 {
            return Err(ConfigError::new("users", "must be at least 1"));
        }
        if self.antennas == 0 {
            return Err(ConfigError::new("antennas", "must be at least 1"));
        }
        if self.rx_antennas == Some(0) {
            return Err(ConfigError::new("rx_antennas", "must be at least 1"));
        }
        if let Some(s) = self.streams {
            let cap = self.antennas.min(self.rx());
            if s == 0 || s > cap {
                return Err(ConfigError::new("streams", format!("must lie in 1..={cap}, got {s}")));
            }
        }
        if !self.power_dbm.is_finite() {
            return Err(ConfigError::new("power_dbm", "must be finite"));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.users {
                return Err(ConfigError::new("weights", format!("expected {} entries, got {}", self.users, w.len())));
            }
            if let Some(i) = w.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(ConfigError::new(format!("weights[{i}]"), "must be finite and nonnegative"));
            }
        }
        positive("noise_variance", self.noise_variance)?;
        self.geometry.validate().map_err(|e| ConfigError::new("geometry", e.to_string()))?;
        if self.solvers.is_empty() {
            return Err(ConfigError::new("solvers", "at least one solver is required"));
        }
        if self.system == SystemKind::Mimo {
            if let Some(i) = self.solvers.iter().position(|a| !a.is_default_variant()) {
                return Err(ConfigError::new(format!("solvers[{i}]"), "variant is only defined for MISO"));
            }
        }
        if self.seeds.seeds().is_empty() {
            return Err(ConfigError::new("seeds", "at least one seed is required"));
        }
        positive("stop_epsilon", self.stop_epsilon)?;
        if self.max_iters == 0 {
            return Err(ConfigError::new("max_iters", "must be at least 1"));
        }
        if !(self.bisection.tol_power >= 0.0) {
            return Err(ConfigError::new("bisection.tol_power", "must be nonnegative"));
        }
        positive("bisection.tol_mu", self.bisection.tol_mu)?;
        if self.bisection.max_iter == 0 {
            return Err(ConfigError::new("bisection.max_iter", "must be at least 1"));
        }
        if self.timing_repeats == 0 {
            return Err(ConfigError::new("timing_repeats", "must be at least 1"));
        }
        Ok(())
    }

    fn rx(&self) -> usize {
        self.rx_antennas.unwrap_or(self.antennas)
    }

    pub fn power_mw(&self) -> f64 {
        dbm_to_linear(self.power_dbm)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.weights.clone().unwrap_or_else(|| vec![1.0; self.users])
    }

    pub fn link_dims(&self) -> LinkDims {
        let rx = self.rx();
        LinkDims { tx: self.antennas, rx, streams: self.streams.unwrap_or(self.antennas.min(rx)) }
    }

    pub fn miso_scenario(&self, seed: u64) -> wsrmax::Result<MisoScenario> {
        let noise = vec![self.noise_variance; self.users];
        generate_miso(&self.geometry.clone().with_seed(seed), self.users, self.antennas, &self.weights(), &noise, self.power_mw())
    }

    pub fn mimo_scenario(&self, seed: u64) -> wsrmax::Result<MimoScenario> {
        let k = self.users;
        generate_mimo(
            &self.geometry.clone().with_seed(seed),
            &vec![self.link_dims(); k],
            &self.weights(),
            &vec![self.noise_variance; k],
            &vec![self.power_mw(); k],
        )
    }

    pub fn solver_config(&self, algorithm: Algorithm) -> SolverConfig {
        SolverConfig::new(algorithm)
            .with_max_iters(self.max_iters)
            .with_stop_epsilon(self.stop_epsilon)
            .with_bisection(self.bisection)
            .with_eta_mode(self.eta_mode)
    }
}
