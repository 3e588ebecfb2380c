//! MISO broadcast solvers: WMMSE, WSR-FP, WSR-MM, WSR-MM+ and WSR-FP+.
//!
//! Every step maps a feasible beamformer set to a feasible one. Steps that
//! depend on auxiliary values from an earlier round (the alternative WMMSE
//! order and the conventional FP variants) take the previous auxiliary state;
//! without one they initialize it from the current point.

use crate::calculus::{curvature_apply_miso, curvature_miso, eta_miso, EtaMode, MmCoefficients, ETA_FLOOR};
use crate::error::{Result, WsrError};
use crate::lagrange::{find_mu, project_ball_factor, BisectionSettings, RegularizedProblem};
use crate::linalg::{c, lambda_max, vec_norm_sq, CMat, CVec, C64};
use crate::solver::{drive, Algorithm, FpVariant, SolverConfig, Step, Trajectory, WmmseOrder};
use crate::system_model::{total_power, wsr_miso, MisoBeamformers, MisoLinkStats, MisoScenario};

/// Auxiliary variables produced by one step.
#[derive(Clone, Debug, PartialEq)]
pub enum MisoAuxState {
    Wmmse { l: Vec<C64>, m: Vec<f64> },
    Fp { gamma: Vec<f64>, phi: Vec<C64> },
    Mm { coeffs: MmCoefficients },
    MmPlus { coeffs: MmCoefficients, eta: f64, q: Vec<CVec> },
    FpPlus { t: Vec<CVec>, gamma: Vec<f64>, y: Vec<C64>, eta: f64, q: Vec<CVec> },
}

pub type MisoStep = Step<MisoBeamformers, MisoAuxState>;

/// `w_k = (G + μI)† r_k` with the minimal feasible `μ`.
fn solve_beamformers(
    scn: &MisoScenario,
    g: CMat,
    rhs: Vec<CVec>,
    bisection: &BisectionSettings,
) -> Result<(MisoBeamformers, usize)> {
    let r = CMat::from_columns(&rhs);
    let prob = RegularizedProblem::new(g, r, scn.power_budget())?;
    let sol = find_mu(&prob, bisection)?;
    let w = (0..scn.num_users()).map(|k| sol.w.column(k).into_owned()).collect();
    Ok((MisoBeamformers { w }, sol.iterations))
}

/// `Σ_j s_j h_j h_j^H`.
fn weighted_gram(scn: &MisoScenario, s: &[f64]) -> CMat {
    let m = scn.num_antennas();
    let mut g = CMat::zeros(m, m);
    for (j, h) in scn.channels().iter().enumerate() {
        if s[j] != 0.0 {
            g += (h * h.adjoint()) * c(s[j], 0.0);
        }
    }
    g
}

/// MMSE receivers `l_k = h_k^H w̄_k / (Σ_j |h_k^H w̄_j|² + σ_k²)`.
fn mmse_receivers(stats: &MisoLinkStats) -> Vec<C64> {
    (0..stats.sinr.len()).map(|k| stats.gains[(k, k)] / stats.total[k]).collect()
}

/// `1 / e_k(l, w̄)` from the MSE with an arbitrary receiver.
fn mse_weights(scn: &MisoScenario, stats: &MisoLinkStats, l: &[C64]) -> Vec<f64> {
    (0..scn.num_users())
        .map(|k| {
            let lc = l[k].conj();
            let own = (lc * stats.gains[(k, k)] - 1.0).norm_sqr();
            let cross: f64 = (0..scn.num_users())
                .filter(|&j| j != k)
                .map(|j| (lc * stats.gains[(k, j)]).norm_sqr())
                .sum();
            1.0 / (own + cross + scn.noise(k) * l[k].norm_sqr())
        })
        .collect()
}

pub fn wmmse_step(
    scn: &MisoScenario,
    bf: &MisoBeamformers,
    order: WmmseOrder,
    prev: Option<&MisoAuxState>,
    bisection: &BisectionSettings,
) -> Result<MisoStep> {
    scn.check(bf)?;
    let stats = MisoLinkStats::new(scn, bf);
    let l_now = mmse_receivers(&stats);
    let (l, m) = match order {
        WmmseOrder::LMW => {
            let m = stats.sinr.iter().map(|s| 1.0 + s).collect();
            (l_now, m)
        }
        WmmseOrder::MLW => {
            let m = match prev {
                Some(MisoAuxState::Wmmse { l: l_prev, .. }) => mse_weights(scn, &stats, l_prev),
                _ => mse_weights(scn, &stats, &l_now),
            };
            (l_now, m)
        }
    };
    let s: Vec<f64> = (0..scn.num_users()).map(|j| scn.weight(j) * m[j] * l[j].norm_sqr()).collect();
    let rhs = (0..scn.num_users())
        .map(|k| scn.channel(k) * (l[k] * (scn.weight(k) * m[k])))
        .collect();
    let (next, mu_iters) = solve_beamformers(scn, weighted_gram(scn, &s), rhs, bisection)?;
    Ok(Step { bf: next, aux: MisoAuxState::Wmmse { l, m }, mu_iters })
}

/// `φ_k = √(ω_k(1+γ_k)) h_k^H w̄_k / (Σ_j |h_k^H w̄_j|² + σ_k²)`.
fn fp_phi(scn: &MisoScenario, stats: &MisoLinkStats, gamma: &[f64]) -> Vec<C64> {
    (0..scn.num_users())
        .map(|k| stats.gains[(k, k)] * ((scn.weight(k) * (1.0 + gamma[k])).sqrt() / stats.total[k]))
        .collect()
}

/// Maximizer over `γ ≥ 0` of
/// `2Re(φ* √(ω(1+γ)) h^H w) + ω(ln(1+γ) − γ)`.
///
/// With `u = Re(φ* h^H w)/√ω` the stationarity condition gives
/// `γ = ½(u² + u√(u² + 4))`, which for real nonnegative `φ* h^H w` is
/// `½(x + √(x² + 4x))` with `x = |φ|²|h^H w|²/ω`. For `u ≤ 0` the objective
/// decreases in `γ` and the maximizer is 0.
pub fn fp_gamma_conventional(phi: &[C64], bf: &MisoBeamformers, scn: &MisoScenario) -> Vec<f64> {
    scn.check(bf).expect("beamformer dimensions");
    (0..scn.num_users())
        .map(|k| gamma_closed_form(phi[k], scn.channel(k).dotc(&bf.w[k]), scn.weight(k)))
        .collect()
}

pub(crate) fn gamma_closed_form(phi: C64, gain: C64, weight: f64) -> f64 {
    if weight <= 0.0 {
        return 0.0;
    }
    let u = (phi.conj() * gain).re / weight.sqrt();
    if u <= 0.0 {
        return 0.0;
    }
    0.5 * (u * u + u * (u * u + 4.0).sqrt())
}

/// Conventional `γ` as printed, with discriminant `x² − 4x`; `None` when
/// the discriminant is negative. Kept to document the sign discrepancy.
pub fn fp_gamma_as_printed(phi: C64, gain: C64, weight: f64) -> Option<f64> {
    let x = phi.norm_sqr() * gain.norm_sqr() / weight;
    let disc = x * x - 4.0 * x;
    (disc >= 0.0).then(|| 0.5 * (x + disc.sqrt()))
}

/// Objective of the `γ` subproblem, for oracles.
pub fn fp_gamma_objective(gamma: f64, phi: C64, gain: C64, weight: f64) -> f64 {
    2.0 * (phi.conj() * gain).re * (weight * (1.0 + gamma)).sqrt() + weight * ((1.0 + gamma).ln() - gamma)
}

pub fn fp_step(
    scn: &MisoScenario,
    bf: &MisoBeamformers,
    variant: FpVariant,
    prev: Option<&MisoAuxState>,
    bisection: &BisectionSettings,
) -> Result<MisoStep> {
    scn.check(bf)?;
    let stats = MisoLinkStats::new(scn, bf);
    let (gamma, phi) = match variant {
        FpVariant::Unconventional => {
            let gamma = stats.sinr.clone();
            let phi = fp_phi(scn, &stats, &gamma);
            (gamma, phi)
        }
        FpVariant::ConvGammaFirst => {
            let phi_prev = match prev {
                Some(MisoAuxState::Fp { phi, .. }) => phi.clone(),
                _ => fp_phi(scn, &stats, &stats.sinr),
            };
            let gamma = fp_gamma_conventional(&phi_prev, bf, scn);
            let phi = fp_phi(scn, &stats, &gamma);
            (gamma, phi)
        }
        FpVariant::ConvPhiFirst => {
            let gamma_prev = match prev {
                Some(MisoAuxState::Fp { gamma, .. }) => gamma.clone(),
                _ => stats.sinr.clone(),
            };
            let phi = fp_phi(scn, &stats, &gamma_prev);
            let gamma = fp_gamma_conventional(&phi, bf, scn);
            (gamma, phi)
        }
    };
    let s: Vec<f64> = phi.iter().map(|p| p.norm_sqr()).collect();
    let rhs = (0..scn.num_users())
        .map(|k| scn.channel(k) * (phi[k] * (scn.weight(k) * (1.0 + gamma[k])).sqrt()))
        .collect();
    let (next, mu_iters) = solve_beamformers(scn, weighted_gram(scn, &s), rhs, bisection)?;
    Ok(Step { bf: next, aux: MisoAuxState::Fp { gamma, phi }, mu_iters })
}

pub fn mm_step(scn: &MisoScenario, bf: &MisoBeamformers, bisection: &BisectionSettings) -> Result<MisoStep> {
    scn.check(bf)?;
    let coeffs = MmCoefficients::from_stats(&MisoLinkStats::new(scn, bf));
    let s: Vec<f64> = (0..scn.num_users()).map(|j| scn.weight(j) * coeffs.a[j]).collect();
    let rhs = (0..scn.num_users())
        .map(|k| scn.channel(k) * (coeffs.b[k].conj() * scn.weight(k)))
        .collect();
    let (next, mu_iters) = solve_beamformers(scn, weighted_gram(scn, &s), rhs, bisection)?;
    Ok(Step { bf: next, aux: MisoAuxState::Mm { coeffs }, mu_iters })
}

/// `min{√(P / Σ‖q_k‖²), 1} · q`.
fn project_total(q: &[CVec], budget: f64) -> MisoBeamformers {
    let power: f64 = q.iter().map(vec_norm_sq).sum();
    let s = project_ball_factor(power, budget);
    MisoBeamformers { w: q.iter().map(|v| v * c(s, 0.0)).collect() }
}

/// `q_k = η⁻¹(ω_k b_k* h_k − (G − ηI) w̄_k)` at `bf`.
pub fn mm_plus_directions(scn: &MisoScenario, bf: &MisoBeamformers, coeffs: &MmCoefficients, eta: f64) -> Vec<CVec> {
    (0..scn.num_users())
        .map(|k| {
            let wb = &bf.w[k];
            let lin = scn.channel(k) * (coeffs.b[k].conj() * scn.weight(k));
            let shifted = curvature_apply_miso(scn, coeffs, wb) - wb * c(eta, 0.0);
            (lin - shifted) * c(1.0 / eta, 0.0)
        })
        .collect()
}

pub fn mm_plus_step(scn: &MisoScenario, bf: &MisoBeamformers, mode: EtaMode) -> Result<MisoStep> {
    scn.check(bf)?;
    let w = bf.stacked();
    let stats = MisoLinkStats::from_stacked(scn, &w);
    let coeffs = MmCoefficients::from_stats(&stats);
    let eta = eta_miso(scn, &coeffs, mode);
    let inv = 1.0 / eta;
    let lin: Vec<C64> = (0..scn.num_users()).map(|k| coeffs.b[k].conj() * (scn.weight(k) * inv)).collect();
    let quad: Vec<f64> = (0..scn.num_users()).map(|j| scn.weight(j) * coeffs.a[j] * inv).collect();
    let q = plus_directions(scn, w, &stats, &lin, &quad);
    let next = project_total(&q, scn.power_budget());
    Ok(Step { bf: next, aux: MisoAuxState::MmPlus { coeffs, eta, q }, mu_iters: 0 })
}

/// `q_k = w̄_k + lin_k h_k − Σ_j quad_j (h_j^H w̄_k) h_j` for all `k` at once:
/// `Q = W̄ + H C` with `C_{jk} = −quad_j (H^H W̄)_{jk} + lin_k δ_{jk}`. The
/// received amplitudes `H^H W̄` come from `stats`.
fn plus_directions(scn: &MisoScenario, mut w: CMat, stats: &MisoLinkStats, lin: &[C64], quad: &[f64]) -> Vec<CVec> {
    let kk = scn.num_users();
    let mut coef = CMat::from_fn(kk, kk, |j, k| stats.gains[(j, k)] * (-quad[j]));
    for k in 0..kk {
        coef[(k, k)] += lin[k];
    }
    w.gemm(c(1.0, 0.0), scn.channel_matrix(), &coef, c(1.0, 0.0));
    MisoBeamformers::from_stacked(&w).w
}

pub fn fp_plus_step(scn: &MisoScenario, bf: &MisoBeamformers, mode: EtaMode) -> Result<MisoStep> {
    scn.check(bf)?;
    let kk = scn.num_users();
    let w = bf.stacked();
    let stats = MisoLinkStats::from_stacked(scn, &w);
    let t = bf.w.clone();
    let gamma = stats.sinr.clone();
    let y = fp_phi(scn, &stats, &gamma);
    let s: Vec<f64> = y.iter().map(|v| v.norm_sqr()).collect();
    let eta = match mode {
        EtaMode::ExactLambdaMax => lambda_max(&weighted_gram(scn, &s)),
        EtaMode::FrobeniusBound => (0..kk).map(|j| s[j] * vec_norm_sq(scn.channel(j))).sum(),
    }
    .max(ETA_FLOOR);
    // t = w̄, so h_j^H t_k is the received amplitude already in `stats`.
    let inv = 1.0 / eta;
    let lin: Vec<C64> = (0..kk).map(|k| y[k] * ((scn.weight(k) * (1.0 + gamma[k])).sqrt() * inv)).collect();
    let quad: Vec<f64> = s.iter().map(|v| v * inv).collect();
    let q = plus_directions(scn, w, &stats, &lin, &quad);
    let next = project_total(&q, scn.power_budget());
    Ok(Step { bf: next, aux: MisoAuxState::FpPlus { t, gamma, y, eta, q }, mu_iters: 0 })
}

/// One step of `algorithm` from `bf`.
pub fn step(
    scn: &MisoScenario,
    bf: &MisoBeamformers,
    algorithm: Algorithm,
    prev: Option<&MisoAuxState>,
    config: &SolverConfig,
) -> Result<MisoStep> {
    match algorithm {
        Algorithm::Wmmse { order } => wmmse_step(scn, bf, order, prev, &config.bisection),
        Algorithm::Fp { variant } => fp_step(scn, bf, variant, prev, &config.bisection),
        Algorithm::Mm => mm_step(scn, bf, &config.bisection),
        Algorithm::MmPlus => mm_plus_step(scn, bf, config.eta_mode),
        Algorithm::FpPlus => fp_plus_step(scn, bf, config.eta_mode),
    }
}

/// Iterate the configured solver from `init`.
pub fn run(scn: &MisoScenario, config: &SolverConfig, init: &MisoBeamformers) -> Result<Trajectory<MisoBeamformers>> {
    config.validate()?;
    scn.check(init)?;
    if !init.is_feasible(scn.power_budget()) {
        return Err(WsrError::Invalid(format!(
            "initial power {} exceeds the budget {}",
            total_power(init),
            scn.power_budget()
        )));
    }
    Ok(drive(init, config, |b| wsr_miso(scn, b), |b, prev| step(scn, b, config.algorithm, prev, config)))
}

/// Curvature matrix `Σ_j ω_j a_j h_j h_j^H` at `bf`, for diagnostics.
pub fn curvature_at(scn: &MisoScenario, bf: &MisoBeamformers) -> CMat {
    curvature_miso(scn, &MmCoefficients::from_stats(&MisoLinkStats::new(scn, bf)))
}
