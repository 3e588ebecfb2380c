//! Numerical certificates for the algebraic identities linking the solver
//! families: auxiliary-variable maps, step-level and sequence-level iterate
//! equality, the Woodbury form of the WMMSE weight, the surrogate
//! interpretations of the FP auxiliary updates, the projected-gradient form
//! of the MM+ step, and the closed-form `γ` fixed point.
//!
//! Pure algebraic maps are held to `1e-9`; comparisons that pass through a
//! multiplier search on both sides are held to `1e-7`, because each side's
//! bisection stops at its own tolerance.

use serde::{Deserialize, Serialize};

use crate::calculus::{eta_miso, grad_wsr_miso, grad_wsr_mimo, mm_matrices_mimo, EtaMode, MmCoefficients};
use crate::error::{Result, WsrError};
use crate::lagrange::BisectionSettings;
use crate::linalg::{c, hermitian_part, hpd_inverse, hpd_logdet, identity, max_abs_diff, max_abs_diff_vec, re_trace, CMat};
use crate::mimo::{
    fp_auxiliaries, fp_plus_step_mimo, fp_step_mimo, mm_plus_step_mimo,
    mm_step_mimo, wmmse_auxiliaries, wmmse_step_mimo, MimoAuxState,
};
use crate::miso::{
    fp_gamma_conventional, fp_plus_step, fp_step, mm_plus_directions as miso_directions, mm_plus_step, mm_step,
    wmmse_step,
};
use crate::rng::SeededStream;
use crate::solver::{FpVariant, WmmseOrder};
use crate::system_model::{
    generate_mimo, generate_miso, random_init_mimo, random_init_miso, wsr_mimo, GeometryConfig, LinkDims,
    MimoBeamformers, MimoLinkStats, MimoScenario, MisoBeamformers, MisoLinkStats, MisoScenario,
};

/// Tolerance for pure algebraic maps.
pub const TOL_MAP: f64 = 1e-9;
/// Tolerance for comparisons through independent multiplier searches.
pub const TOL_STEP: f64 = 1e-7;
/// Tolerance for the MISO projected-gradient identity and `γ` fixed point.
pub const TOL_MISO_ALGEBRA: f64 = 1e-10;
/// Allowed excess of a surrogate over the objective.
pub const TOL_MINORIZATION: f64 = 1e-8;

/// Largest problem size accepted by [`run_suite`].
pub const MAX_USERS: usize = 8;
pub const MAX_DIM: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub seed: Option<u64>,
    pub num_users: usize,
    pub dims: String,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(identity: &str, num_users: usize, dims: String, discrepancy: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.to_string(),
            seed: None,
            num_users,
            dims,
            discrepancy,
            tolerance,
            pass: discrepancy <= tolerance,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn miso_dims(scn: &MisoScenario) -> String {
    format!("M={}", scn.num_antennas())
}

fn mimo_dims(scn: &MimoScenario) -> String {
    let d = scn.dims(0);
    let uniform = (0..scn.num_links()).all(|k| scn.dims(k) == d);
    if uniform {
        format!("Mt={},Mr={},Ms={}", d.tx, d.rx, d.streams)
    } else {
        "mixed".to_string()
    }
}

fn nan_guard(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

fn report_miso(id: &str, scn: &MisoScenario, disc: f64, tol: f64) -> IdentityReport {
    IdentityReport::new(id, scn.num_users(), miso_dims(scn), nan_guard(disc), tol)
}

fn report_mimo(id: &str, scn: &MimoScenario, disc: f64, tol: f64) -> IdentityReport {
    IdentityReport::new(id, scn.num_links(), mimo_dims(scn), nan_guard(disc), tol)
}

fn failed(id: &str, users: usize, err: WsrError) -> IdentityReport {
    IdentityReport::new(id, users, format!("error: {err}"), f64::INFINITY, 0.0)
}

// ---------------------------------------------------------------------------
// MIMO maps
// ---------------------------------------------------------------------------

/// `(I − X^H (F + XX^H)⁻¹ X)⁻¹` against `I + X^H F⁻¹ X`, and against the
/// WMMSE weight built from its receiver.
pub fn check_woodbury_mk(scn: &MimoScenario, bf: &MimoBeamformers) -> IdentityReport {
    let id = "woodbury_mk";
    let inner = || -> Result<f64> {
        let stats = MimoLinkStats::new(scn, bf)?;
        let (_, m) = wmmse_auxiliaries(scn, bf)?;
        let mut disc: f64 = 0.0;
        for k in 0..scn.num_links() {
            let x = &stats.x[k];
            let s = &stats.f[k] + x * x.adjoint();
            let s_inv = hpd_inverse(&s).ok_or_else(|| WsrError::Singular("F + XX^H".into()))?;
            let ms = scn.dims(k).streams;
            let e = hermitian_part(&(identity(ms) - x.adjoint() * s_inv * x));
            let lhs = hpd_inverse(&e).ok_or_else(|| WsrError::Singular("E".into()))?;
            let rhs = identity(ms) + &stats.gamma[k];
            disc = disc.max(max_abs_diff(&lhs, &rhs)).max(max_abs_diff(&m[k], &rhs));
        }
        Ok(disc)
    };
    match inner() {
        Ok(d) => report_mimo(id, scn, d, TOL_MAP),
        Err(e) => failed(id, scn.num_links(), e),
    }
}

/// `A = L M L^H`, `B = M^H L^H` from the WMMSE auxiliaries against the
/// surrogate matrices. `perturbation` is added to every `A` entry as a
/// negative control.
pub fn check_wmmse_mm_map_perturbed(scn: &MimoScenario, bf: &MimoBeamformers, perturbation: f64) -> IdentityReport {
    let id = "wmmse_mm_map";
    let (l, m) = match wmmse_auxiliaries(scn, bf) {
        Ok(v) => v,
        Err(e) => return failed(id, scn.num_links(), e),
    };
    let mats = mm_matrices_mimo(scn, bf);
    let mut disc: f64 = 0.0;
    for k in 0..scn.num_links() {
        let mut a = &l[k] * &m[k] * l[k].adjoint();
        a.iter_mut().for_each(|z| *z += perturbation);
        let b = m[k].adjoint() * l[k].adjoint();
        disc = disc.max(max_abs_diff(&a, &mats.a[k])).max(max_abs_diff(&b, &mats.b[k]));
    }
    report_mimo(id, scn, disc, TOL_MAP)
}

pub fn check_wmmse_mm_map(scn: &MimoScenario, bf: &MimoBeamformers) -> IdentityReport {
    check_wmmse_mm_map_perturbed(scn, bf, 0.0)
}

/// `A = ω⁻¹ Φ(I+Γ)Φ^H`, `B = ω^{-1/2} (I+Γ^H)Φ^H` against the surrogate
/// matrices. Links with zero weight are skipped.
pub fn check_fp_mm_map(scn: &MimoScenario, bf: &MimoBeamformers) -> IdentityReport {
    let id = "fp_mm_map";
    let (phi, gamma) = match fp_auxiliaries(scn, bf) {
        Ok(v) => v,
        Err(e) => return failed(id, scn.num_links(), e),
    };
    let mats = mm_matrices_mimo(scn, bf);
    let mut disc: f64 = 0.0;
    for k in 0..scn.num_links() {
        let w = scn.weight(k);
        if w <= 0.0 {
            continue;
        }
        let ig = identity(gamma[k].nrows()) + &gamma[k];
        let a = &phi[k] * &ig * phi[k].adjoint() * c(1.0 / w, 0.0);
        let b = ig.adjoint() * phi[k].adjoint() * c(1.0 / w.sqrt(), 0.0);
        disc = disc.max(max_abs_diff(&a, &mats.a[k])).max(max_abs_diff(&b, &mats.b[k]));
    }
    report_mimo(id, scn, disc, TOL_MAP)
}

fn mimo_diff(a: &MimoBeamformers, b: &MimoBeamformers) -> f64 {
    a.max_abs_diff(b)
}

/// Next iterates of WMMSE, WSR-FP and WSR-MM from `bf`.
pub fn check_mimo_step_equivalence(scn: &MimoScenario, bf: &MimoBeamformers, bisection: &BisectionSettings) -> IdentityReport {
    let id = "mimo_wmmse_fp_mm_step";
    let steps = (|| -> Result<_> {
        Ok((
            wmmse_step_mimo(scn, bf, bisection)?.bf,
            fp_step_mimo(scn, bf, bisection)?.bf,
            mm_step_mimo(scn, bf, bisection)?.bf,
        ))
    })();
    match steps {
        Ok((a, b, m)) => report_mimo(id, scn, mimo_diff(&a, &m).max(mimo_diff(&b, &m)), TOL_STEP),
        Err(e) => failed(id, scn.num_links(), e),
    }
}

/// `Q_k` from the MM+ step against `W̄_k + grad_k / (2η_k)`.
pub fn check_pgd_identity_mimo(scn: &MimoScenario, bf: &MimoBeamformers, mode: EtaMode) -> IdentityReport {
    let id = "pgd_identity_mimo";
    let step = match mm_plus_step_mimo(scn, bf, mode) {
        Ok(s) => s,
        Err(e) => return failed(id, scn.num_links(), e),
    };
    let (eta, q) = match &step.aux {
        MimoAuxState::MmPlus { eta, q, .. } => (eta.clone(), q.clone()),
        _ => unreachable!("MM+ step returns MM+ state"),
    };
    let grad = grad_wsr_mimo(scn, bf);
    let mut disc: f64 = 0.0;
    for k in 0..scn.num_links() {
        let pgd = &bf.w[k] + &grad[k] * c(0.5 / eta[k], 0.0);
        disc = disc.max(max_abs_diff(&q[k], &pgd));
    }
    report_mimo(id, scn, disc, TOL_MAP)
}

/// MM+ and FP+ next iterates from `bf`.
pub fn check_plus_equivalence_mimo(scn: &MimoScenario, bf: &MimoBeamformers, mode: EtaMode) -> IdentityReport {
    let id = "mimo_mm_plus_fp_plus_step";
    match (mm_plus_step_mimo(scn, bf, mode), fp_plus_step_mimo(scn, bf, mode)) {
        (Ok(a), Ok(b)) => report_mimo(id, scn, mimo_diff(&a.bf, &b.bf), TOL_MAP),
        (Err(e), _) | (_, Err(e)) => failed(id, scn.num_links(), e),
    }
}

/// Objective of the Lagrangian-dual reformulation with `Γ` fixed at the
/// anchor value: `Σ ω_k(ln det(I+Γ̄) − tr Γ̄ + tr((I+Γ̄) X^H (F+XX^H)⁻¹ X))`.
fn lagrangian_dual_value(scn: &MimoScenario, trial: &MimoBeamformers, gamma_bar: &[CMat]) -> Result<f64> {
    let stats = MimoLinkStats::new(scn, trial)?;
    let mut total = 0.0;
    for k in 0..scn.num_links() {
        let x = &stats.x[k];
        let s_inv = hpd_inverse(&(&stats.f[k] + x * x.adjoint())).ok_or_else(|| WsrError::Singular("S".into()))?;
        let ig = identity(gamma_bar[k].nrows()) + &gamma_bar[k];
        let ld = hpd_logdet(&ig).ok_or_else(|| WsrError::Singular("I + Γ̄".into()))?;
        total += scn.weight(k) * (ld - re_trace(&gamma_bar[k]) + re_trace(&(&ig * x.adjoint() * s_inv * x)));
    }
    Ok(total)
}

/// Log-det tangent bound `ln det Z̄ + tr(I − Z̄ Z⁻¹)` with `Z = I + Γ(trial)`.
fn logdet_surrogate_value(scn: &MimoScenario, trial: &MimoBeamformers, gamma_bar: &[CMat]) -> Result<f64> {
    let stats = MimoLinkStats::new(scn, trial)?;
    let mut total = 0.0;
    for k in 0..scn.num_links() {
        let n = gamma_bar[k].nrows();
        let z_bar = identity(n) + &gamma_bar[k];
        let z = identity(n) + &stats.gamma[k];
        let z_inv = hpd_inverse(&z).ok_or_else(|| WsrError::Singular("Z".into()))?;
        let ld = hpd_logdet(&z_bar).ok_or_else(|| WsrError::Singular("Z̄".into()))?;
        total += scn.weight(k) * (ld + re_trace(&(identity(n) - z_bar * z_inv)));
    }
    Ok(total)
}

fn surrogate_trial_check(
    scn: &MimoScenario,
    anchor: &MimoBeamformers,
    trials: &[MimoBeamformers],
    f1: impl Fn(&MimoBeamformers) -> Result<f64>,
    f2: impl Fn(&MimoBeamformers) -> Result<f64>,
) -> Result<f64> {
    let mut disc: f64 = 0.0;
    let anchor_wsr = wsr_mimo(scn, anchor);
    disc = disc.max((f1(anchor)? - anchor_wsr).abs()).max((f2(anchor)? - anchor_wsr).abs());
    for t in trials {
        let a = f1(t)?;
        let b = f2(t)?;
        let excess = (a.max(b) - wsr_mimo(scn, t) - TOL_MINORIZATION).max(0.0);
        disc = disc.max((a - b).abs()).max(excess);
    }
    Ok(disc)
}

/// The `Γ` update of the Lagrangian-dual reformulation as a log-det tangent
/// surrogate: both objectives agree on every trial point, equal the WSR at
/// the anchor, and lie below the WSR elsewhere.
pub fn check_prop9(scn: &MimoScenario, anchor: &MimoBeamformers, trials: &[MimoBeamformers]) -> IdentityReport {
    let id = "logdet_surrogate_gamma_update";
    let gamma_bar = match MimoLinkStats::new(scn, anchor) {
        Ok(s) => s.gamma,
        Err(e) => return failed(id, scn.num_links(), e),
    };
    let res = surrogate_trial_check(
        scn,
        anchor,
        trials,
        |t| lagrangian_dual_value(scn, t, &gamma_bar),
        |t| logdet_surrogate_value(scn, t, &gamma_bar),
    );
    match res {
        Ok(d) => report_mimo(id, scn, d, TOL_MINORIZATION),
        Err(e) => failed(id, scn.num_links(), e),
    }
}

/// The `Φ` update of the quadratic transform as a matrix-ratio surrogate of
/// the Lagrangian-dual objective, with `Γ` fixed at the anchor.
pub fn check_prop10(scn: &MimoScenario, anchor: &MimoBeamformers, trials: &[MimoBeamformers]) -> IdentityReport {
    let id = "matrix_ratio_surrogate_phi_update";
    let setup = (|| -> Result<_> {
        let stats = MimoLinkStats::new(scn, anchor)?;
        let (phi, _) = fp_auxiliaries(scn, anchor)?;
        let mut s_bar_inv = Vec::new();
        for k in 0..scn.num_links() {
            let s = &stats.f[k] + &stats.x[k] * stats.x[k].adjoint();
            s_bar_inv.push(hpd_inverse(&s).ok_or_else(|| WsrError::Singular("S̄".into()))?);
        }
        Ok((stats, phi, s_bar_inv))
    })();
    let (anchor_stats, phi_bar, s_bar_inv) = match setup {
        Ok(v) => v,
        Err(e) => return failed(id, scn.num_links(), e),
    };
    let constants: Vec<f64> = (0..scn.num_links())
        .map(|k| {
            let g = &anchor_stats.gamma[k];
            scn.weight(k) * (hpd_logdet(&(identity(g.nrows()) + g)).unwrap_or(f64::NAN) - re_trace(g))
        })
        .collect();
    // Quadratic transform with Φ at its optimal anchor value.
    let quadratic = |t: &MimoBeamformers| -> Result<f64> {
        let stats = MimoLinkStats::new(scn, t)?;
        let mut total = 0.0;
        for k in 0..scn.num_links() {
            let ig = identity(anchor_stats.gamma[k].nrows()) + &anchor_stats.gamma[k];
            let x = &stats.x[k] * c(scn.weight(k).sqrt(), 0.0);
            let s = &stats.f[k] + &stats.x[k] * stats.x[k].adjoint();
            let cross = x.adjoint() * &phi_bar[k];
            let inner = &cross + cross.adjoint() - phi_bar[k].adjoint() * s * &phi_bar[k];
            total += constants[k] + re_trace(&(ig * inner));
        }
        Ok(total)
    };
    // Matrix-ratio bound with Z₁ = √ω X, Z₂ = F + XX^H, anchored at the anchor.
    let ratio_bound = |t: &MimoBeamformers| -> Result<f64> {
        let stats = MimoLinkStats::new(scn, t)?;
        let mut total = 0.0;
        for k in 0..scn.num_links() {
            let ig = identity(anchor_stats.gamma[k].nrows()) + &anchor_stats.gamma[k];
            let sw = c(scn.weight(k).sqrt(), 0.0);
            let z1 = &stats.x[k] * sw;
            let z1_bar = &anchor_stats.x[k] * sw;
            let z2 = &stats.f[k] + &stats.x[k] * stats.x[k].adjoint();
            let lead = z1_bar.adjoint() * &s_bar_inv[k];
            let cross = &lead * &z1;
            let inner = &cross + cross.adjoint() - &lead * z2 * &s_bar_inv[k] * &z1_bar;
            total += constants[k] + re_trace(&(ig * inner));
        }
        Ok(total)
    };
    match surrogate_trial_check(scn, anchor, trials, quadratic, ratio_bound) {
        Ok(d) => report_mimo(id, scn, d, TOL_MINORIZATION),
        Err(e) => failed(id, scn.num_links(), e),
    }
}

// ---------------------------------------------------------------------------
// MISO
// ---------------------------------------------------------------------------

/// Next iterates of WMMSE (receiver-first order), unconventional WSR-FP and
/// WSR-MM from `bf`.
pub fn check_miso_step_equivalence(scn: &MisoScenario, bf: &MisoBeamformers, bisection: &BisectionSettings) -> IdentityReport {
    let id = "miso_wmmse_fp_mm_step";
    let steps = (|| -> Result<_> {
        Ok((
            wmmse_step(scn, bf, WmmseOrder::LMW, None, bisection)?.bf,
            fp_step(scn, bf, FpVariant::Unconventional, None, bisection)?.bf,
            mm_step(scn, bf, bisection)?.bf,
        ))
    })();
    match steps {
        Ok((a, b, m)) => report_miso(id, scn, a.max_abs_diff(&m).max(b.max_abs_diff(&m)), TOL_STEP),
        Err(e) => failed(id, scn.num_users(), e),
    }
}

pub fn check_plus_equivalence_miso(scn: &MisoScenario, bf: &MisoBeamformers, mode: EtaMode) -> IdentityReport {
    let id = "miso_mm_plus_fp_plus_step";
    match (mm_plus_step(scn, bf, mode), fp_plus_step(scn, bf, mode)) {
        (Ok(a), Ok(b)) => report_miso(id, scn, a.bf.max_abs_diff(&b.bf), TOL_MISO_ALGEBRA),
        (Err(e), _) | (_, Err(e)) => failed(id, scn.num_users(), e),
    }
}

/// `q_k` against `w̄_k + grad_k / (2η)`.
pub fn check_pgd_identity_miso(scn: &MisoScenario, bf: &MisoBeamformers, mode: EtaMode) -> IdentityReport {
    let coeffs = MmCoefficients::from_stats(&MisoLinkStats::new(scn, bf));
    let eta = eta_miso(scn, &coeffs, mode);
    let q = miso_directions(scn, bf, &coeffs, eta);
    let grad = grad_wsr_miso(scn, bf);
    let disc = (0..scn.num_users())
        .map(|k| max_abs_diff_vec(&q[k], &(&bf.w[k] + &grad[k] * c(0.5 / eta, 0.0))))
        .fold(0.0, f64::max);
    report_miso("pgd_identity_miso", scn, disc, TOL_MISO_ALGEBRA)
}

/// The closed-form `γ`, evaluated at `φ` from the FP receiver step, returns
/// the SINR.
pub fn check_gamma_closed_form(scn: &MisoScenario, bf: &MisoBeamformers) -> IdentityReport {
    let stats = MisoLinkStats::new(scn, bf);
    let phi: Vec<_> = (0..scn.num_users())
        .map(|k| stats.gains[(k, k)] * ((scn.weight(k) * (1.0 + stats.sinr[k])).sqrt() / stats.total[k]))
        .collect();
    let gamma = fp_gamma_conventional(&phi, bf, scn);
    let disc = gamma
        .iter()
        .zip(&stats.sinr)
        .enumerate()
        .filter(|(k, _)| scn.weight(*k) > 0.0)
        .map(|(_, (g, s))| (g - s).abs())
        .fold(0.0, f64::max);
    report_miso("gamma_fixed_point", scn, disc, TOL_MISO_ALGEBRA)
}

// ---------------------------------------------------------------------------
// Sequence-level checks
// ---------------------------------------------------------------------------

/// Iterate `steps` rounds of WMMSE, WSR-FP and WSR-MM from a common start and
/// report the largest iterate difference along the way.
pub fn check_miso_sequence(
    scn: &MisoScenario,
    init: &MisoBeamformers,
    steps: usize,
    bisection: &BisectionSettings,
) -> IdentityReport {
    let id = "miso_wmmse_fp_mm_sequence";
    let run = || -> Result<f64> {
        let (mut a, mut b, mut m) = (init.clone(), init.clone(), init.clone());
        let mut disc: f64 = 0.0;
        for _ in 0..steps {
            a = wmmse_step(scn, &a, WmmseOrder::LMW, None, bisection)?.bf;
            b = fp_step(scn, &b, FpVariant::Unconventional, None, bisection)?.bf;
            m = mm_step(scn, &m, bisection)?.bf;
            disc = disc.max(a.max_abs_diff(&m)).max(b.max_abs_diff(&m));
        }
        Ok(disc)
    };
    match run() {
        Ok(d) => report_miso(id, scn, d, TOL_STEP),
        Err(e) => failed(id, scn.num_users(), e),
    }
}

pub fn check_miso_plus_sequence(scn: &MisoScenario, init: &MisoBeamformers, steps: usize, mode: EtaMode) -> IdentityReport {
    let id = "miso_mm_plus_fp_plus_sequence";
    let run = || -> Result<f64> {
        let (mut a, mut b) = (init.clone(), init.clone());
        let mut disc: f64 = 0.0;
        for _ in 0..steps {
            a = mm_plus_step(scn, &a, mode)?.bf;
            b = fp_plus_step(scn, &b, mode)?.bf;
            disc = disc.max(a.max_abs_diff(&b));
        }
        Ok(disc)
    };
    match run() {
        Ok(d) => report_miso(id, scn, d, TOL_MAP),
        Err(e) => failed(id, scn.num_users(), e),
    }
}

pub fn check_mimo_sequence(
    scn: &MimoScenario,
    init: &MimoBeamformers,
    steps: usize,
    bisection: &BisectionSettings,
) -> IdentityReport {
    let id = "mimo_wmmse_fp_mm_sequence";
    let run = || -> Result<f64> {
        let (mut a, mut b, mut m) = (init.clone(), init.clone(), init.clone());
        let mut disc: f64 = 0.0;
        for _ in 0..steps {
            a = wmmse_step_mimo(scn, &a, bisection)?.bf;
            b = fp_step_mimo(scn, &b, bisection)?.bf;
            m = mm_step_mimo(scn, &m, bisection)?.bf;
            disc = disc.max(mimo_diff(&a, &m)).max(mimo_diff(&b, &m));
        }
        Ok(disc)
    };
    match run() {
        Ok(d) => report_mimo(id, scn, d, TOL_STEP),
        Err(e) => failed(id, scn.num_links(), e),
    }
}

pub fn check_mimo_plus_sequence(scn: &MimoScenario, init: &MimoBeamformers, steps: usize, mode: EtaMode) -> IdentityReport {
    let id = "mimo_mm_plus_fp_plus_sequence";
    let run = || -> Result<f64> {
        let (mut a, mut b) = (init.clone(), init.clone());
        let mut disc: f64 = 0.0;
        for _ in 0..steps {
            a = mm_plus_step_mimo(scn, &a, mode)?.bf;
            b = fp_plus_step_mimo(scn, &b, mode)?.bf;
            disc = disc.max(mimo_diff(&a, &b));
        }
        Ok(disc)
    };
    match run() {
        Ok(d) => report_mimo(id, scn, d, TOL_MAP),
        Err(e) => failed(id, scn.num_links(), e),
    }
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub num_users: usize,
    /// Antennas (MISO) and antennas/streams per link (MIMO).
    pub dim: usize,
    /// Rounds compared in the sequence-level checks.
    pub sequence_steps: usize,
    /// Random trial points for the surrogate checks.
    pub trials: usize,
    pub eta_mode: EtaMode,
    pub geometry: GeometryConfig,
    /// Perturb the WMMSE→MM map by `1e-3` as a negative control.
    pub force_fail: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            num_users: 4,
            dim: 4,
            sequence_steps: 10,
            trials: 20,
            eta_mode: EtaMode::FrobeniusBound,
            geometry: GeometryConfig::default(),
            force_fail: false,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 || self.num_users > MAX_USERS || self.dim == 0 || self.dim > MAX_DIM {
            return Err(WsrError::Invalid(format!(
                "suite dimensions must satisfy 1 ≤ K ≤ {MAX_USERS} and 1 ≤ M ≤ {MAX_DIM}"
            )));
        }
        self.geometry.validate()
    }
}

/// Random per-link trial beamformers with power uniform in `[0, P_k]`.
pub fn random_trials_mimo(scn: &MimoScenario, seed: u64, count: usize) -> Vec<MimoBeamformers> {
    let mut rng = SeededStream::new(seed, 7);
    (0..count)
        .map(|_| MimoBeamformers {
            w: (0..scn.num_links())
                .map(|k| {
                    let d = scn.dims(k);
                    let w = rng.complex_gaussian_mat(d.tx, d.streams, 1.0);
                    let target = scn.budget(k) * rng.uniform();
                    let p = crate::linalg::fro_norm_sq(&w);
                    w * c((target / p).sqrt(), 0.0)
                })
                .collect(),
        })
        .collect()
}

/// All identity checks on one seeded MISO and one seeded MIMO instance.
pub fn run_seed(seed: u64, cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    cfg.validate()?;
    let k = cfg.num_users;
    let geo = cfg.geometry.clone().with_seed(seed);
    let ones = vec![1.0; k];
    let bis = BisectionSettings::exact();

    let miso = generate_miso(&geo, k, cfg.dim, &ones, &ones, 1.0)?;
    let w0 = random_init_miso(&miso, seed);
    let mimo = generate_mimo(&geo, &vec![LinkDims::uniform(cfg.dim); k], &ones, &ones, &ones)?;
    let v0 = random_init_mimo(&mimo, seed);
    let trials = random_trials_mimo(&mimo, seed, cfg.trials);

    let reports = vec![
        check_miso_step_equivalence(&miso, &w0, &bis),
        check_miso_sequence(&miso, &w0, cfg.sequence_steps, &bis),
        check_plus_equivalence_miso(&miso, &w0, cfg.eta_mode),
        check_miso_plus_sequence(&miso, &w0, cfg.sequence_steps, cfg.eta_mode),
        check_pgd_identity_miso(&miso, &w0, cfg.eta_mode),
        check_gamma_closed_form(&miso, &w0),
        check_woodbury_mk(&mimo, &v0),
        check_wmmse_mm_map_perturbed(&mimo, &v0, if cfg.force_fail { 1e-3 } else { 0.0 }),
        check_fp_mm_map(&mimo, &v0),
        check_mimo_step_equivalence(&mimo, &v0, &bis),
        check_mimo_sequence(&mimo, &v0, cfg.sequence_steps, &bis),
        check_plus_equivalence_mimo(&mimo, &v0, cfg.eta_mode),
        check_mimo_plus_sequence(&mimo, &v0, cfg.sequence_steps, cfg.eta_mode),
        check_pgd_identity_mimo(&mimo, &v0, cfg.eta_mode),
        check_prop9(&mimo, &v0, &trials),
        check_prop10(&mimo, &v0, &trials),
    ];
    Ok(reports.into_iter().map(|r| r.with_seed(seed)).collect())
}

pub fn run_suite(seeds: &[u64], cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    if seeds.is_empty() {
        return Err(WsrError::Invalid("at least one seed is required".into()));
    }
    let mut out = Vec::new();
    for &s in seeds {
        out.extend(run_seed(s, cfg)?);
    }
    Ok(out)
}
