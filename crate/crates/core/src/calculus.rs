//! Wirtinger gradients of the WSR, the MM surrogates `ℓ` and `ℓ′`, the
//! curvature constant `η`, and the minorization inequalities the surrogates
//! are built from.
//!
//! Gradients follow the convention `grad = 2 ∂f/∂w*`, so the first-order
//! change of `f` along a perturbation `δ` is `Re⟨grad, δ⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WsrError};
use crate::linalg::{
    c, fro_norm_sq, hermitian_defect, hermitian_part, hpd_inverse, hpd_logdet, identity, lambda_max,
    min_eigenvalue, re_trace, re_trace_product, vec_norm_sq, CMat, CVec, C64,
};
use crate::system_model::{
    MimoBeamformers, MimoLinkStats, MimoScenario, MisoBeamformers, MisoLinkStats, MisoScenario,
};

/// Lower limit on `η`, reached only when the curvature matrix vanishes.
pub const ETA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    /// Largest eigenvalue of the curvature matrix.
    ExactLambdaMax,
    /// Closed-form upper bound through Frobenius norms.
    #[default]
    FrobeniusBound,
}

impl std::str::FromStr for EtaMode {
    type Err = WsrError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact_lambda_max" => Ok(Self::ExactLambdaMax),
            "frobenius" | "frobenius_bound" => Ok(Self::FrobeniusBound),
            other => Err(WsrError::Invalid(format!("unknown eta mode `{other}`"))),
        }
    }
}

// ---------------------------------------------------------------------------
// MISO
// ---------------------------------------------------------------------------

/// Surrogate coefficients at an anchor, plus the anchor constants needed to
/// evaluate the surrogate exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct MmCoefficients {
    /// `a_k = SINR_k / (Σ_j |h_k^H w̄_j|² + σ_k²)`.
    pub a: Vec<f64>,
    /// `b_k = SINR_k / (h_k^H w̄_k)`; zero when the denominator is.
    pub b: Vec<C64>,
    pub sinr: Vec<f64>,
    pub rate: Vec<f64>,
}

impl MmCoefficients {
    pub(crate) fn from_stats(stats: &MisoLinkStats) -> Self {
        let k = stats.sinr.len();
        let mut a = vec![0.0; k];
        let mut b = vec![C64::new(0.0, 0.0); k];
        for i in 0..k {
            a[i] = stats.sinr[i] / stats.total[i];
            let g = stats.gains[(i, i)];
            if g.norm_sqr() > 0.0 {
                b[i] = C64::new(stats.sinr[i], 0.0) / g;
            }
        }
        Self { a, b, sinr: stats.sinr.clone(), rate: stats.sinr.iter().map(|s| s.ln_1p()).collect() }
    }
}

pub fn mm_coefficients_miso(scn: &MisoScenario, anchor: &MisoBeamformers) -> MmCoefficients {
    scn.check(anchor).expect("beamformer dimensions");
    MmCoefficients::from_stats(&MisoLinkStats::new(scn, anchor))
}

/// `Σ_j ω_j a_j h_j h_j^H`.
pub fn curvature_miso(scn: &MisoScenario, coeffs: &MmCoefficients) -> CMat {
    let m = scn.num_antennas();
    let mut g = CMat::zeros(m, m);
    for (j, h) in scn.channels().iter().enumerate() {
        let s = scn.weight(j) * coeffs.a[j];
        if s != 0.0 {
            g += (h * h.adjoint()) * c(s, 0.0);
        }
    }
    g
}

/// `(Σ_j ω_j a_j h_j h_j^H) v` without forming the matrix.
pub(crate) fn curvature_apply_miso(scn: &MisoScenario, coeffs: &MmCoefficients, v: &CVec) -> CVec {
    let mut out = CVec::zeros(v.len());
    for (j, h) in scn.channels().iter().enumerate() {
        let s = scn.weight(j) * coeffs.a[j];
        if s != 0.0 {
            out.axpy(h.dotc(v) * s, h, C64::new(1.0, 0.0));
        }
    }
    out
}

pub fn eta_miso(scn: &MisoScenario, coeffs: &MmCoefficients, mode: EtaMode) -> f64 {
    let eta = match mode {
        EtaMode::ExactLambdaMax => lambda_max(&curvature_miso(scn, coeffs)),
        EtaMode::FrobeniusBound => scn
            .channels()
            .iter()
            .enumerate()
            .map(|(j, h)| scn.weight(j) * coeffs.a[j] * vec_norm_sq(h))
            .sum(),
    };
    eta.max(ETA_FLOOR)
}

/// Gradient of the MISO WSR in its direct form:
/// `2ω_k h_k h_k^H w_k / I_k − Σ_j ω_j SINR_j · 2 h_j h_j^H w_k / D_j`.
pub fn grad_wsr_miso(scn: &MisoScenario, bf: &MisoBeamformers) -> Vec<CVec> {
    scn.check(bf).expect("beamformer dimensions");
    let stats = MisoLinkStats::new(scn, bf);
    let kk = scn.num_users();
    (0..kk)
        .map(|k| {
            let hk = scn.channel(k);
            let mut g = hk * (stats.gains[(k, k)] * (2.0 * scn.weight(k) / stats.interference[k]));
            for j in 0..kk {
                let s = scn.weight(j) * stats.sinr[j] * 2.0 / stats.total[j];
                if s != 0.0 {
                    g.axpy(stats.gains[(j, k)] * (-s), scn.channel(j), C64::new(1.0, 0.0));
                }
            }
            g
        })
        .collect()
}

/// Gradient through the surrogate coefficients:
/// `2(ω_k b_k* h_k − Σ_j ω_j a_j h_j h_j^H w_k)`.
pub fn grad_wsr_miso_mm_form(scn: &MisoScenario, bf: &MisoBeamformers) -> Vec<CVec> {
    let coeffs = mm_coefficients_miso(scn, bf);
    (0..scn.num_users())
        .map(|k| {
            let lin = scn.channel(k) * (coeffs.b[k].conj() * scn.weight(k));
            (lin - curvature_apply_miso(scn, &coeffs, &bf.w[k])) * c(2.0, 0.0)
        })
        .collect()
}

/// `ℓ(bf, anchor)` including the anchor constants.
pub fn surrogate_miso(bf: &MisoBeamformers, anchor: &MisoBeamformers, scn: &MisoScenario) -> f64 {
    let coeffs = mm_coefficients_miso(scn, anchor);
    surrogate_miso_with(bf, scn, &coeffs)
}

pub(crate) fn surrogate_miso_with(bf: &MisoBeamformers, scn: &MisoScenario, coeffs: &MmCoefficients) -> f64 {
    scn.check(bf).expect("beamformer dimensions");
    let mut total = 0.0;
    for k in 0..scn.num_users() {
        let hk = scn.channel(k);
        let received: f64 = bf.w.iter().map(|w| hk.dotc(w).norm_sqr()).sum();
        let linear = 2.0 * (coeffs.b[k] * hk.dotc(&bf.w[k])).re;
        let constant = coeffs.rate[k] - coeffs.sinr[k] - coeffs.a[k] * scn.noise(k);
        total += scn.weight(k) * (-coeffs.a[k] * received + linear + constant);
    }
    total
}

/// `ℓ′(bf, anchor)` for curvature constant `eta`.
pub fn surrogate_plus_miso(bf: &MisoBeamformers, anchor: &MisoBeamformers, scn: &MisoScenario, eta: f64) -> f64 {
    scn.check(bf).expect("beamformer dimensions");
    let coeffs = mm_coefficients_miso(scn, anchor);
    let mut total = 0.0;
    for k in 0..scn.num_users() {
        let w = &bf.w[k];
        let wb = &anchor.w[k];
        // (G − ηI) w̄
        let shifted = curvature_apply_miso(scn, &coeffs, wb) - wb * c(eta, 0.0);
        let quad = eta * vec_norm_sq(w) + 2.0 * w.dotc(&shifted).re - wb.dotc(&shifted).re;
        let hk = scn.channel(k);
        let linear = 2.0 * (coeffs.b[k] * hk.dotc(w)).re;
        let constant = coeffs.rate[k] - coeffs.sinr[k] - coeffs.a[k] * scn.noise(k);
        total += -quad + scn.weight(k) * (linear + constant);
    }
    total
}

// ---------------------------------------------------------------------------
// MIMO
// ---------------------------------------------------------------------------

/// Surrogate matrices at an anchor, with the anchor's link statistics.
#[derive(Clone, Debug)]
pub struct MmMatrices {
    /// `A_k = F̄⁻¹X̄(I+Γ̄)⁻¹X̄^H F̄⁻¹`, `Mʳ × Mʳ`, Hermitian PSD.
    pub a: Vec<CMat>,
    /// `B_k = X̄^H F̄⁻¹`, `Mˢ × Mʳ`.
    pub b: Vec<CMat>,
    pub stats: MimoLinkStats,
}

impl MmMatrices {
    pub(crate) fn from_stats(stats: MimoLinkStats) -> Result<Self> {
        let kk = stats.rate.len();
        let mut a = Vec::with_capacity(kk);
        let mut b = Vec::with_capacity(kk);
        for k in 0..kk {
            let bk = stats.x[k].adjoint() * &stats.f_inv[k];
            let ms = stats.gamma[k].nrows();
            let inv = hpd_inverse(&(identity(ms) + &stats.gamma[k]))
                .ok_or_else(|| WsrError::Singular(format!("I + Γ_{k}")))?;
            a.push(hermitian_part(&(bk.adjoint() * inv * &bk)));
            b.push(bk);
        }
        Ok(Self { a, b, stats })
    }
}

pub fn mm_matrices_mimo(scn: &MimoScenario, anchor: &MimoBeamformers) -> MmMatrices {
    let stats = MimoLinkStats::new(scn, anchor).expect("F_k positive definite");
    MmMatrices::from_stats(stats).expect("I + Γ positive definite")
}

/// `Σ_j ω_j H_{j,k}^H A_j H_{j,k}` for transmitter `k`.
pub fn curvature_mimo(scn: &MimoScenario, mats: &MmMatrices, k: usize) -> CMat {
    let m = scn.dims(k).tx;
    let mut g = CMat::zeros(m, m);
    for j in 0..scn.num_links() {
        let h = scn.channel(j, k);
        g += h.adjoint() * (&mats.a[j] * h) * c(scn.weight(j), 0.0);
    }
    hermitian_part(&g)
}

/// `(Σ_j ω_j H_{j,k}^H A_j H_{j,k}) V` without forming the matrix.
pub(crate) fn curvature_apply_mimo(scn: &MimoScenario, mats: &MmMatrices, k: usize, v: &CMat) -> CMat {
    let mut out = CMat::zeros(v.nrows(), v.ncols());
    for j in 0..scn.num_links() {
        let h = scn.channel(j, k);
        out += h.adjoint() * (&mats.a[j] * (h * v)) * c(scn.weight(j), 0.0);
    }
    out
}

pub fn eta_mimo(scn: &MimoScenario, mats: &MmMatrices, k: usize, mode: EtaMode) -> f64 {
    let eta = match mode {
        EtaMode::ExactLambdaMax => lambda_max(&curvature_mimo(scn, mats, k)),
        EtaMode::FrobeniusBound => (0..scn.num_links())
            .map(|j| scn.weight(j) * mats.a[j].norm() * fro_norm_sq(scn.channel(j, k)))
            .sum(),
    };
    eta.max(ETA_FLOOR)
}

/// Gradient of the MIMO WSR:
/// `2ω_k H_kk^H F_k⁻¹ H_kk W_k − 2 Σ_i ω_i H_ik^H (F_i + X_i X_i^H)⁻¹ X_i X_i^H F_i⁻¹ H_ik W_k`.
pub fn grad_wsr_mimo(scn: &MimoScenario, bf: &MimoBeamformers) -> Vec<CMat> {
    let stats = MimoLinkStats::new(scn, bf).expect("F_k positive definite");
    let kk = scn.num_links();
    // (F_i + X_i X_i^H)⁻¹ X_i X_i^H F_i⁻¹
    let middle: Vec<CMat> = (0..kk)
        .map(|i| {
            let s = &stats.f[i] + &stats.x[i] * stats.x[i].adjoint();
            let s_inv = hpd_inverse(&s).expect("F + XX^H positive definite");
            s_inv * &stats.x[i] * (stats.x[i].adjoint() * &stats.f_inv[i])
        })
        .collect();
    (0..kk)
        .map(|k| {
            let hkk = scn.channel(k, k);
            let mut g = hkk.adjoint() * (&stats.f_inv[k] * &stats.x[k]) * c(2.0 * scn.weight(k), 0.0);
            for i in 0..kk {
                let h = scn.channel(i, k);
                g -= h.adjoint() * (&middle[i] * (h * &bf.w[k])) * c(2.0 * scn.weight(i), 0.0);
            }
            g
        })
        .collect()
}

/// `ℓ(bf, anchor)` for the MIMO interference channel, constants included.
pub fn surrogate_mimo(bf: &MimoBeamformers, anchor: &MimoBeamformers, scn: &MimoScenario) -> f64 {
    scn.check(bf).expect("beamformer dimensions");
    let mats = mm_matrices_mimo(scn, anchor);
    let mut total = 0.0;
    for k in 0..scn.num_links() {
        let mut quad = 0.0;
        for j in 0..scn.num_links() {
            let y = scn.channel(k, j) * &bf.w[j];
            quad += re_trace_product(&y.adjoint(), &(&mats.a[k] * &y));
        }
        let linear = 2.0 * re_trace_product(&mats.b[k], &(scn.channel(k, k) * &bf.w[k]));
        let constant = mats.stats.rate[k] - re_trace(&mats.stats.gamma[k]) - scn.noise(k) * re_trace(&mats.a[k]);
        total += scn.weight(k) * (-quad + linear + constant);
    }
    total
}

/// `ℓ′(bf, anchor)` with per-link curvature constants `eta[k]`.
pub fn surrogate_plus_mimo(bf: &MimoBeamformers, anchor: &MimoBeamformers, scn: &MimoScenario, eta: &[f64]) -> f64 {
    scn.check(bf).expect("beamformer dimensions");
    assert_eq!(eta.len(), scn.num_links(), "one η per link");
    let mats = mm_matrices_mimo(scn, anchor);
    let mut total = 0.0;
    for k in 0..scn.num_links() {
        let w = &bf.w[k];
        let wb = &anchor.w[k];
        let shifted = curvature_apply_mimo(scn, &mats, k, wb) - wb * c(eta[k], 0.0);
        let quad = eta[k] * fro_norm_sq(w) + 2.0 * re_trace_product(&w.adjoint(), &shifted)
            - re_trace_product(&wb.adjoint(), &shifted);
        let linear = 2.0 * re_trace_product(&mats.b[k], &(scn.channel(k, k) * w));
        let constant = mats.stats.rate[k] - re_trace(&mats.stats.gamma[k]) - scn.noise(k) * re_trace(&mats.a[k]);
        total += -quad + scn.weight(k) * (linear + constant);
    }
    total
}

// ---------------------------------------------------------------------------
// Minorization inequalities
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    /// `ln(1 + |x|²/z)` lower bound, scalar.
    LogQuadratic,
    /// `ln det(I + X^H Z⁻¹ X)` lower bound.
    LogDetQuadratic,
    /// `ln det Z ≥ ln det Z̄ + tr(I − Z̄ Z⁻¹)`.
    LogDet,
    /// Matrix-ratio bound `Z₁^H Z₂⁻¹ Z₁ ⪰ 2Re(Z̄₁^H Z̄₂⁻¹ Z₁) − Z̄₁^H Z̄₂⁻¹ Z₂ Z̄₂⁻¹ Z̄₁`.
    MatrixRatio,
    /// Quadratic upper bound through `M ⪰ L`.
    QuadraticCurvature,
}

/// One inequality together with its evaluation point and anchor.
#[derive(Clone, Debug)]
pub enum BoundInstance {
    LogQuadratic { x: C64, z: f64, x0: C64, z0: f64 },
    LogDetQuadratic { x: CMat, z: CMat, x0: CMat, z0: CMat },
    LogDet { z: CMat, z0: CMat },
    MatrixRatio { z1: CMat, z2: CMat, z1_0: CMat, z2_0: CMat },
    QuadraticCurvature { l: CMat, m: CMat, x: CMat, x0: CMat },
}

impl BoundInstance {
    pub fn id(&self) -> BoundId {
        match self {
            Self::LogQuadratic { .. } => BoundId::LogQuadratic,
            Self::LogDetQuadratic { .. } => BoundId::LogDetQuadratic,
            Self::LogDet { .. } => BoundId::LogDet,
            Self::MatrixRatio { .. } => BoundId::MatrixRatio,
            Self::QuadraticCurvature { .. } => BoundId::QuadraticCurvature,
        }
    }
}

fn require_hpd(a: &CMat, name: &str) -> Result<CMat> {
    if !a.is_square() {
        return Err(WsrError::Domain(format!("{name} must be square")));
    }
    let scale = a.norm().max(1.0);
    if hermitian_defect(a) > 1e-10 * scale {
        return Err(WsrError::Domain(format!("{name} must be Hermitian")));
    }
    hpd_inverse(a).ok_or_else(|| WsrError::Domain(format!("{name} must be positive definite")))
}

fn logdet_checked(a: &CMat, name: &str) -> Result<f64> {
    hpd_logdet(a).ok_or_else(|| WsrError::Domain(format!("{name} must be positive definite")))
}

/// `lhs − rhs` of the inequality; nonnegative on its domain and zero at the
/// anchor. Matrix-valued inequalities report the smallest eigenvalue of the
/// difference.
pub fn evaluate_bound_gap(bound: &BoundInstance) -> Result<f64> {
    match bound {
        BoundInstance::LogQuadratic { x, z, x0, z0 } => {
            if !(*z > 0.0) || !(*z0 > 0.0) {
                return Err(WsrError::Domain("z and z̄ must be positive".into()));
            }
            let p0 = x0.norm_sqr();
            let lhs = (x.norm_sqr() / z).ln_1p();
            let rhs = (p0 / z0).ln_1p() - p0 / z0 + 2.0 * (x0.conj() / z0 * x).re
                - p0 / (z0 * (z0 + p0)) * (z + x.norm_sqr());
            Ok(lhs - rhs)
        }
        BoundInstance::LogDetQuadratic { x, z, x0, z0 } => {
            if x.shape() != x0.shape() || z.nrows() != x.nrows() || z0.shape() != z.shape() {
                return Err(WsrError::Dimension("inconsistent shapes".into()));
            }
            let zi = require_hpd(z, "Z")?;
            let z0i = require_hpd(z0, "Z̄")?;
            let n = x.ncols();
            let lhs = logdet_checked(&(identity(n) + x.adjoint() * &zi * x), "I + X^H Z⁻¹ X")?;
            let g0 = x0.adjoint() * &z0i * x0;
            let s0 = z0 + x0 * x0.adjoint();
            let s0i = require_hpd(&s0, "Z̄ + X̄X̄^H")?;
            let rhs = logdet_checked(&(identity(n) + &g0), "I + Γ̄")? - re_trace(&g0)
                + 2.0 * re_trace(&(x0.adjoint() * &z0i * x))
                - re_trace(&(s0i * x0 * x0.adjoint() * &z0i * (z + x * x.adjoint())));
            Ok(lhs - rhs)
        }
        BoundInstance::LogDet { z, z0 } => {
            if z.shape() != z0.shape() {
                return Err(WsrError::Dimension("inconsistent shapes".into()));
            }
            let zi = require_hpd(z, "Z")?;
            require_hpd(z0, "Z̄")?;
            let n = z.nrows();
            let lhs = logdet_checked(z, "Z")?;
            let rhs = logdet_checked(z0, "Z̄")? + re_trace(&(identity(n) - z0 * zi));
            Ok(lhs - rhs)
        }
        BoundInstance::MatrixRatio { z1, z2, z1_0, z2_0 } => {
            if z1.shape() != z1_0.shape() || z2.shape() != z2_0.shape() || z2.nrows() != z1.nrows() {
                return Err(WsrError::Dimension("inconsistent shapes".into()));
            }
            let z2i = require_hpd(z2, "Z₂")?;
            let z20i = require_hpd(z2_0, "Z̄₂")?;
            let lhs = z1.adjoint() * z2i * z1;
            let cross = z1_0.adjoint() * &z20i * z1;
            let rhs = &cross + cross.adjoint() - z1_0.adjoint() * &z20i * z2 * &z20i * z1_0;
            Ok(min_eigenvalue(&hermitian_part(&(lhs - rhs))))
        }
        BoundInstance::QuadraticCurvature { l, m, x, x0 } => {
            if l.shape() != m.shape() || !l.is_square() || x.shape() != x0.shape() || x.nrows() != l.nrows() {
                return Err(WsrError::Dimension("inconsistent shapes".into()));
            }
            let scale = l.norm().max(m.norm()).max(1.0);
            if hermitian_defect(l) > 1e-10 * scale || hermitian_defect(m) > 1e-10 * scale {
                return Err(WsrError::Domain("L and M must be Hermitian".into()));
            }
            let diff = m - l;
            if min_eigenvalue(&diff) < -1e-10 * scale {
                return Err(WsrError::Domain("M ⪰ L is required".into()));
            }
            let lhs = re_trace(&(x.adjoint() * m * x));
            let rhs = re_trace(&(x.adjoint() * l * x)) + 2.0 * re_trace(&(x.adjoint() * &diff * x0))
                - re_trace(&(x0.adjoint() * &diff * x0));
            Ok(lhs - rhs)
        }
    }
}
