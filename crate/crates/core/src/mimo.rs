//! MIMO interference-channel solvers: WMMSE, WSR-FP, WSR-MM, WSR-MM+ and
//! WSR-FP+, each with a per-link power budget.
//!
//! The quadratic form for transmitter `k` collects the interference it
//! causes at every receiver `j`: `Σ_j H_{j,k}^H (·)_j H_{j,k}`.

use crate::calculus::{curvature_apply_mimo, eta_mimo, EtaMode, MmMatrices, ETA_FLOOR};
use crate::error::{Result, WsrError};
use crate::lagrange::{find_mu, project_ball_factor, BisectionSettings, RegularizedProblem};
use crate::linalg::{c, fro_norm_sq, hermitian_part, hpd_inverse, identity, lambda_max, CMat};
use crate::solver::{drive, Algorithm, FpVariant, SolverConfig, Step, Trajectory, WmmseOrder};
use crate::system_model::{wsr_mimo, MimoBeamformers, MimoLinkStats, MimoScenario};

#[derive(Clone, Debug)]
pub enum MimoAuxState {
    Wmmse { l: Vec<CMat>, m: Vec<CMat> },
    Fp { phi: Vec<CMat>, gamma: Vec<CMat> },
    Mm { mats: MmMatrices },
    MmPlus { mats: MmMatrices, eta: Vec<f64>, q: Vec<CMat> },
    FpPlus { t: Vec<CMat>, phi: Vec<CMat>, gamma: Vec<CMat>, eta: Vec<f64>, q: Vec<CMat> },
}

pub type MimoStep = Step<MimoBeamformers, MimoAuxState>;

fn link_stats(scn: &MimoScenario, bf: &MimoBeamformers) -> Result<MimoLinkStats> {
    MimoLinkStats::new(scn, bf)
}

/// `(F_k + X_k X_k^H)⁻¹`.
fn total_covariance_inverse(stats: &MimoLinkStats, k: usize) -> Result<CMat> {
    let s = &stats.f[k] + &stats.x[k] * stats.x[k].adjoint();
    hpd_inverse(&s).ok_or_else(|| WsrError::Singular(format!("F_{k} + X_{k}X_{k}^H")))
}

/// `Σ_j H_{j,k}^H C_j H_{j,k}` for Hermitian `C_j`.
fn transmitter_gram(scn: &MimoScenario, k: usize, cj: &[CMat]) -> CMat {
    let m = scn.dims(k).tx;
    let mut g = CMat::zeros(m, m);
    for (j, cm) in cj.iter().enumerate() {
        let h = scn.channel(j, k);
        g += h.adjoint() * (cm * h);
    }
    hermitian_part(&g)
}

/// Per-link `W_k = (G_k + μ_k I)† R_k` with minimal feasible `μ_k`.
fn solve_links(
    scn: &MimoScenario,
    grams: Vec<CMat>,
    rhs: Vec<CMat>,
    bisection: &BisectionSettings,
) -> Result<(MimoBeamformers, usize)> {
    let mut w = Vec::with_capacity(scn.num_links());
    let mut iters = 0;
    for (k, (g, r)) in grams.into_iter().zip(rhs).enumerate() {
        let sol = find_mu(&RegularizedProblem::new(g, r, scn.budget(k))?, bisection)?;
        iters += sol.iterations;
        w.push(sol.w);
    }
    Ok((MimoBeamformers { w }, iters))
}

/// Receivers `L_k` and weights `M_k` at `bf`.
pub fn wmmse_auxiliaries(scn: &MimoScenario, bf: &MimoBeamformers) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let stats = link_stats(scn, bf)?;
    let kk = scn.num_links();
    let mut ls = Vec::with_capacity(kk);
    let mut ms = Vec::with_capacity(kk);
    for k in 0..kk {
        let s_inv = total_covariance_inverse(&stats, k)?;
        let l = s_inv * &stats.x[k];
        // E_k = L^H (F + XX^H) L − L^H X − X^H L + I
        let s = &stats.f[k] + &stats.x[k] * stats.x[k].adjoint();
        let lhx = l.adjoint() * &stats.x[k];
        let e = l.adjoint() * s * &l - &lhx - lhx.adjoint() + identity(scn.dims(k).streams);
        let m = hpd_inverse(&hermitian_part(&e)).ok_or_else(|| WsrError::Singular(format!("E_{k}")))?;
        ls.push(l);
        ms.push(hermitian_part(&m));
    }
    Ok((ls, ms))
}

pub fn wmmse_step_mimo(scn: &MimoScenario, bf: &MimoBeamformers, bisection: &BisectionSettings) -> Result<MimoStep> {
    let (l, m) = wmmse_auxiliaries(scn, bf)?;
    let kk = scn.num_links();
    let lml: Vec<CMat> = (0..kk)
        .map(|j| hermitian_part(&(&l[j] * &m[j] * l[j].adjoint())) * c(scn.weight(j), 0.0))
        .collect();
    let grams = (0..kk).map(|k| transmitter_gram(scn, k, &lml)).collect();
    let rhs = (0..kk)
        .map(|k| scn.channel(k, k).adjoint() * &l[k] * &m[k] * c(scn.weight(k), 0.0))
        .collect();
    let (next, mu_iters) = solve_links(scn, grams, rhs, bisection)?;
    Ok(Step { bf: next, aux: MimoAuxState::Wmmse { l, m }, mu_iters })
}

/// `Φ_k = (F_k + X_k X_k^H)⁻¹ √ω_k X_k` and `Γ_k = X_k^H F_k⁻¹ X_k` at `bf`.
pub fn fp_auxiliaries(scn: &MimoScenario, bf: &MimoBeamformers) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let stats = link_stats(scn, bf)?;
    let mut phi = Vec::with_capacity(scn.num_links());
    for k in 0..scn.num_links() {
        phi.push(total_covariance_inverse(&stats, k)? * &stats.x[k] * c(scn.weight(k).sqrt(), 0.0));
    }
    Ok((phi, stats.gamma))
}

/// `Φ_j (I + Γ_j) Φ_j^H`.
fn fp_inner(phi: &[CMat], gamma: &[CMat]) -> Vec<CMat> {
    phi.iter()
        .zip(gamma)
        .map(|(p, g)| hermitian_part(&(p * (identity(g.nrows()) + g) * p.adjoint())))
        .collect()
}

/// `√ω_k H_{k,k}^H Φ_k (I + Γ_k)`.
fn fp_linear(scn: &MimoScenario, phi: &[CMat], gamma: &[CMat], k: usize) -> CMat {
    scn.channel(k, k).adjoint() * &phi[k] * (identity(gamma[k].nrows()) + &gamma[k]) * c(scn.weight(k).sqrt(), 0.0)
}

pub fn fp_step_mimo(scn: &MimoScenario, bf: &MimoBeamformers, bisection: &BisectionSettings) -> Result<MimoStep> {
    let (phi, gamma) = fp_auxiliaries(scn, bf)?;
    let kk = scn.num_links();
    let inner = fp_inner(&phi, &gamma);
    let grams = (0..kk).map(|k| transmitter_gram(scn, k, &inner)).collect();
    let rhs = (0..kk).map(|k| fp_linear(scn, &phi, &gamma, k)).collect();
    let (next, mu_iters) = solve_links(scn, grams, rhs, bisection)?;
    Ok(Step { bf: next, aux: MimoAuxState::Fp { phi, gamma }, mu_iters })
}

fn mm_matrices(scn: &MimoScenario, bf: &MimoBeamformers) -> Result<MmMatrices> {
    MmMatrices::from_stats(link_stats(scn, bf)?)
}

pub fn mm_step_mimo(scn: &MimoScenario, bf: &MimoBeamformers, bisection: &BisectionSettings) -> Result<MimoStep> {
    let mats = mm_matrices(scn, bf)?;
    let kk = scn.num_links();
    let weighted: Vec<CMat> = (0..kk).map(|j| &mats.a[j] * c(scn.weight(j), 0.0)).collect();
    let grams = (0..kk).map(|k| transmitter_gram(scn, k, &weighted)).collect();
    let rhs = (0..kk)
        .map(|k| scn.channel(k, k).adjoint() * mats.b[k].adjoint() * c(scn.weight(k), 0.0))
        .collect();
    let (next, mu_iters) = solve_links(scn, grams, rhs, bisection)?;
    Ok(Step { bf: next, aux: MimoAuxState::Mm { mats }, mu_iters })
}

/// `Q_k = η_k⁻¹(ω_k H_{k,k}^H B_k^H − (G_k − η_k I) W̄_k)`.
pub fn mm_plus_directions(scn: &MimoScenario, bf: &MimoBeamformers, mats: &MmMatrices, eta: &[f64]) -> Vec<CMat> {
    (0..scn.num_links())
        .map(|k| {
            let wb = &bf.w[k];
            let lin = scn.channel(k, k).adjoint() * mats.b[k].adjoint() * c(scn.weight(k), 0.0);
            let shifted = curvature_apply_mimo(scn, mats, k, wb) - wb * c(eta[k], 0.0);
            (lin - shifted) * c(1.0 / eta[k], 0.0)
        })
        .collect()
}

/// `Q_k min{√(P_k/‖Q_k‖²), 1}` per link.
fn project_links(scn: &MimoScenario, q: &[CMat]) -> MimoBeamformers {
    MimoBeamformers {
        w: q.iter()
            .enumerate()
            .map(|(k, qk)| qk * c(project_ball_factor(fro_norm_sq(qk), scn.budget(k)), 0.0))
            .collect(),
    }
}

pub fn mm_plus_step_mimo(scn: &MimoScenario, bf: &MimoBeamformers, mode: EtaMode) -> Result<MimoStep> {
    let mats = mm_matrices(scn, bf)?;
    let eta: Vec<f64> = (0..scn.num_links()).map(|k| eta_mimo(scn, &mats, k, mode)).collect();
    let q = mm_plus_directions(scn, bf, &mats, &eta);
    let next = project_links(scn, &q);
    Ok(Step { bf: next, aux: MimoAuxState::MmPlus { mats, eta, q }, mu_iters: 0 })
}

pub fn fp_plus_step_mimo(scn: &MimoScenario, bf: &MimoBeamformers, mode: EtaMode) -> Result<MimoStep> {
    let kk = scn.num_links();
    let t = bf.w.clone();
    let (phi, gamma) = fp_auxiliaries(scn, bf)?;
    let inner = fp_inner(&phi, &gamma);
    let mut eta = Vec::with_capacity(kk);
    let mut q = Vec::with_capacity(kk);
    for k in 0..kk {
        let e = match mode {
            EtaMode::ExactLambdaMax => lambda_max(&transmitter_gram(scn, k, &inner)),
            EtaMode::FrobeniusBound => (0..kk).map(|j| inner[j].norm() * fro_norm_sq(scn.channel(j, k))).sum(),
        }
        .max(ETA_FLOOR);
        let mut gt = CMat::zeros(t[k].nrows(), t[k].ncols());
        for (j, cm) in inner.iter().enumerate() {
            let h = scn.channel(j, k);
            gt += h.adjoint() * (cm * (h * &t[k]));
        }
        let lin = fp_linear(scn, &phi, &gamma, k);
        q.push((lin - (gt - &t[k] * c(e, 0.0))) * c(1.0 / e, 0.0));
        eta.push(e);
    }
    let next = project_links(scn, &q);
    Ok(Step { bf: next, aux: MimoAuxState::FpPlus { t, phi, gamma, eta, q }, mu_iters: 0 })
}

pub fn step_mimo(
    scn: &MimoScenario,
    bf: &MimoBeamformers,
    algorithm: Algorithm,
    config: &SolverConfig,
) -> Result<MimoStep> {
    scn.check(bf)?;
    match algorithm {
        Algorithm::Wmmse { order: WmmseOrder::LMW } => wmmse_step_mimo(scn, bf, &config.bisection),
        Algorithm::Fp { variant: FpVariant::Unconventional } => fp_step_mimo(scn, bf, &config.bisection),
        Algorithm::Mm => mm_step_mimo(scn, bf, &config.bisection),
        Algorithm::MmPlus => mm_plus_step_mimo(scn, bf, config.eta_mode),
        Algorithm::FpPlus => fp_plus_step_mimo(scn, bf, config.eta_mode),
        other => Err(WsrError::Invalid(format!("{other} is only defined for MISO"))),
    }
}

pub fn run_mimo(scn: &MimoScenario, config: &SolverConfig, init: &MimoBeamformers) -> Result<Trajectory<MimoBeamformers>> {
    config.validate()?;
    scn.check(init)?;
    if !config.algorithm.is_default_variant() {
        return Err(WsrError::Invalid(format!("{} is only defined for MISO", config.algorithm)));
    }
    if !init.is_feasible(scn.budgets()) {
        return Err(WsrError::Invalid("initial beamformers violate a per-link budget".into()));
    }
    Ok(drive(init, config, |b| wsr_mimo(scn, b), |b, _prev: Option<&MimoAuxState>| step_mimo(scn, b, config.algorithm, config)))
}
