//! Solver identifiers, run configuration and the iteration driver shared by
//! the MISO and MIMO families.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::calculus::EtaMode;
use crate::error::{Result, WsrError};
use crate::lagrange::BisectionSettings;

/// Update order of the WMMSE family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WmmseOrder {
    /// Receiver, then weight, then beamformer.
    #[default]
    LMW,
    /// Weight (with the previous receiver), then receiver, then beamformer.
    MLW,
}

/// `γ` rule of the fractional-programming family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpVariant {
    /// `γ = SINR` from the Lagrangian dual problem.
    #[default]
    Unconventional,
    /// Closed-form `γ` from the previous `φ`, then `φ`, then `w`.
    ConvGammaFirst,
    /// `φ` from the previous `γ`, then closed-form `γ`, then `w`.
    ConvPhiFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Algorithm {
    Wmmse {
        #[serde(default)]
        order: WmmseOrder,
    },
    Fp {
        #[serde(default)]
        variant: FpVariant,
    },
    Mm,
    MmPlus,
    FpPlus,
}

impl Algorithm {
    pub const WMMSE: Self = Self::Wmmse { order: WmmseOrder::LMW };
    pub const FP: Self = Self::Fp { variant: FpVariant::Unconventional };

    /// The five default-variant families in display order.
    pub fn families() -> [Self; 5] {
        [Self::WMMSE, Self::FP, Self::Mm, Self::MmPlus, Self::FpPlus]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Wmmse { .. } => "wmmse",
            Self::Fp { .. } => "wsr_fp",
            Self::Mm => "wsr_mm",
            Self::MmPlus => "wsr_mm_plus",
            Self::FpPlus => "wsr_fp_plus",
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Wmmse { order: WmmseOrder::LMW } => "l_m_w",
            Self::Wmmse { order: WmmseOrder::MLW } => "m_l_w",
            Self::Fp { variant: FpVariant::Unconventional } => "unconventional",
            Self::Fp { variant: FpVariant::ConvGammaFirst } => "conv_gamma_first",
            Self::Fp { variant: FpVariant::ConvPhiFirst } => "conv_phi_first",
            Self::Mm | Self::MmPlus | Self::FpPlus => "default",
        }
    }

    /// Whether the step needs a multiplier search.
    pub fn uses_bisection(&self) -> bool {
        !matches!(self, Self::MmPlus | Self::FpPlus)
    }

    pub fn is_default_variant(&self) -> bool {
        matches!(self.variant_name(), "l_m_w" | "unconventional" | "default")
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.name(), self.variant_name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Stop once `wsr(t) − wsr(t−1) < stop_epsilon`.
    pub stop_epsilon: f64,
    pub max_iters: usize,
    pub bisection: BisectionSettings,
    pub eta_mode: EtaMode,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            stop_epsilon: 1e-6,
            max_iters: 10_000,
            bisection: BisectionSettings::exact(),
            eta_mode: EtaMode::default(),
            seed: 0,
        }
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_bisection(mut self, b: BisectionSettings) -> Self {
        self.bisection = b;
        self
    }

    pub fn with_eta_mode(mut self, m: EtaMode) -> Self {
        self.eta_mode = m;
        self
    }

    pub fn with_stop_epsilon(mut self, e: f64) -> Self {
        self.stop_epsilon = e;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stop_epsilon > 0.0) {
            return Err(WsrError::Invalid("stop_epsilon must be positive".into()));
        }
        self.bisection.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub wsr: f64,
    pub cumulative_seconds: f64,
    pub mu_iters: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory<B> {
    /// Record 0 is the initial point.
    pub records: Vec<IterRecord>,
    pub final_bf: B,
    pub converged: bool,
    /// Step failure that ended the run early.
    pub error: Option<WsrError>,
}

impl<B> Trajectory<B> {
    pub fn final_wsr(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.wsr)
    }

    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn total_seconds(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cumulative_seconds)
    }

    /// Largest decrease `wsr(t) − wsr(t+1)` observed, or 0 for monotone runs.
    pub fn max_decrease(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[0].wsr - w[1].wsr)
            .fold(0.0, f64::max)
    }

    pub fn wsr_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.wsr).collect()
    }
}

/// Output of one step: next iterate, auxiliary state, bisection work.
#[derive(Clone, Debug)]
pub struct Step<B, A> {
    pub bf: B,
    pub aux: A,
    pub mu_iters: usize,
}

/// Iterate `step` from `init` until the WSR increment drops below
/// `stop_epsilon` (decreases included) or `max_iters` steps are taken.
/// Only the step itself is timed.
pub(crate) fn drive<B: Clone, A>(
    init: &B,
    config: &SolverConfig,
    eval: impl Fn(&B) -> f64,
    mut step: impl FnMut(&B, Option<&A>) -> Result<Step<B, A>>,
) -> Trajectory<B> {
    let mut bf = init.clone();
    let mut wsr = eval(&bf);
    let mut records = vec![IterRecord { iter: 0, wsr, cumulative_seconds: 0.0, mu_iters: 0 }];
    let mut aux: Option<A> = None;
    let mut elapsed = 0.0;
    let mut converged = false;
    let mut error = None;
    for it in 1..=config.max_iters {
        let t0 = Instant::now();
        let out = step(&bf, aux.as_ref());
        elapsed += t0.elapsed().as_secs_f64();
        let out = match out {
            Ok(s) => s,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let next = eval(&out.bf);
        records.push(IterRecord { iter: it, wsr: next, cumulative_seconds: elapsed, mu_iters: out.mu_iters });
        let increment = next - wsr;
        bf = out.bf;
        aux = Some(out.aux);
        wsr = next;
        if increment < config.stop_epsilon {
            converged = true;
            break;
        }
    }
    Trajectory { records, final_bf: bf, converged, error }
}
