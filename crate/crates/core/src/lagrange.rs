//! Regularized solves `(G + μI)† R` and the bisection search for the power
//! multiplier `μ`.
//!
//! `G` is eigendecomposed once per problem. With `G = U Λ U^H` and
//! `C = U^H R`, the power curve is `‖W(μ)‖² = Σ_i g(λ_i)² ‖C_i,:‖²`, so each
//! bisection probe costs `O(n)` and only the final solution needs `U`.

use nalgebra::DVector;

use crate::error::{Result, WsrError};
use crate::linalg::{hermitian_defect, hermitian_eigen, CMat};

/// Absolute floor of the pseudo-inverse cutoff.
pub const RANK_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RegularizedProblem {
    g: CMat,
    r: CMat,
    budget: f64,
}

impl RegularizedProblem {
    pub fn new(g: CMat, r: CMat, budget: f64) -> Result<Self> {
        if !g.is_square() || g.nrows() != r.nrows() {
            return Err(WsrError::Dimension(format!(
                "G is {:?} and R is {:?}",
                g.shape(),
                r.shape()
            )));
        }
        let scale = g.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if hermitian_defect(&g) > 1e-10 * scale {
            return Err(WsrError::Domain("G must be Hermitian".into()));
        }
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(WsrError::Domain("budget must be positive".into()));
        }
        Ok(Self { g, r, budget })
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }
    pub fn r(&self) -> &CMat {
        &self.r
    }
    pub fn budget(&self) -> f64 {
        self.budget
    }
}

/// `RegularizedProblem` with its spectral data cached.
#[derive(Clone, Debug)]
pub struct SpectralSolver {
    u: CMat,
    lambda: DVector<f64>,
    coeffs: CMat,
    row_energy: Vec<f64>,
    tau: f64,
    r_norm: f64,
    budget: f64,
}

impl SpectralSolver {
    pub fn new(prob: &RegularizedProblem) -> Self {
        let (lambda, u) = hermitian_eigen(&prob.g);
        let coeffs = u.adjoint() * &prob.r;
        let row_energy = (0..coeffs.nrows())
            .map(|i| coeffs.row(i).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let lmax = lambda.iter().cloned().fold(0.0, f64::max);
        Self {
            u,
            lambda,
            coeffs,
            row_energy,
            tau: RANK_FLOOR * lmax.max(1.0),
            r_norm: prob.r.norm(),
            budget: prob.budget,
        }
    }

    #[inline]
    fn gain(&self, lambda: f64, mu: f64) -> f64 {
        let s = lambda + mu;
        if s > self.tau {
            1.0 / s
        } else {
            0.0
        }
    }

    fn check_mu(mu: f64) -> Result<()> {
        if !(mu >= 0.0) {
            return Err(WsrError::Domain(format!("μ must be nonnegative, got {mu}")));
        }
        Ok(())
    }

    pub fn power(&self, mu: f64) -> Result<f64> {
        Self::check_mu(mu)?;
        Ok(self.power_unchecked(mu))
    }

    fn power_unchecked(&self, mu: f64) -> f64 {
        self.lambda
            .iter()
            .zip(&self.row_energy)
            .map(|(&l, &e)| {
                let g = self.gain(l, mu);
                g * g * e
            })
            .sum()
    }

    pub fn solve(&self, mu: f64) -> Result<CMat> {
        Self::check_mu(mu)?;
        let mut scaled = self.coeffs.clone();
        for i in 0..scaled.nrows() {
            let g = self.gain(self.lambda[i], mu);
            scaled.row_mut(i).scale_mut(g);
        }
        Ok(&self.u * scaled)
    }

    /// Minimal `μ ≥ 0` with `‖W(μ)‖² ≤ budget`, found by bisection.
    pub fn find_mu(&self, settings: &BisectionSettings) -> Result<MuSolution> {
        settings.validate()?;
        let budget = self.budget;
        let p0 = self.power_unchecked(0.0);
        if p0 <= budget * (1.0 + 1e-12) {
            return self.finish(0.0, 0);
        }
        let mut hi = self.r_norm / budget.sqrt();
        let mut guard = 0;
        while self.power_unchecked(hi) > budget {
            hi *= 2.0;
            guard += 1;
            if guard > 1100 || !hi.is_finite() {
                return Err(WsrError::SearchFailure { lo: 0.0, hi, iterations: 0 });
            }
        }
        let mut lo = 0.0;
        for it in 1..=settings.max_iter {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return self.finish(hi, it);
            }
            let p = self.power_unchecked(mid);
            if settings.tol_power > 0.0 && (p - budget).abs() <= settings.tol_power * budget {
                return self.finish(mid, it);
            }
            if p > budget {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= settings.tol_mu {
                return self.finish(hi, it);
            }
        }
        Err(WsrError::SearchFailure { lo, hi, iterations: settings.max_iter })
    }

    fn finish(&self, mu: f64, iterations: usize) -> Result<MuSolution> {
        let w = self.solve(mu)?;
        Ok(MuSolution { mu, power: self.power_unchecked(mu), w, iterations })
    }
}

/// Stopping rules for [`find_mu`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BisectionSettings {
    /// Accept `μ` once `|power − budget| ≤ tol_power · budget`; 0 disables.
    pub tol_power: f64,
    /// Stop once the bracket is at most this wide and return its feasible end.
    pub tol_mu: f64,
    pub max_iter: usize,
}

impl Default for BisectionSettings {
    fn default() -> Self {
        Self::exact()
    }
}

impl BisectionSettings {
    /// Tight tolerances under which every solver is monotone.
    pub fn exact() -> Self {
        Self { tol_power: 1e-10, tol_mu: 1e-15, max_iter: 200 }
    }

    /// Interval-width rule only: stop once the bracket is narrower than `2^{-i}`.
    pub fn relaxed(i: u32) -> Self {
        Self { tol_power: 0.0, tol_mu: 2f64.powi(-(i as i32)), max_iter: 200 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_power >= 0.0) || !(self.tol_mu > 0.0) || self.max_iter == 0 {
            return Err(WsrError::Invalid(format!("invalid bisection settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MuSolution {
    pub mu: f64,
    pub w: CMat,
    pub iterations: usize,
    /// `‖W(μ)‖²` at the returned multiplier.
    pub power: f64,
}

pub fn pinv_solve(prob: &RegularizedProblem, mu: f64) -> Result<CMat> {
    SpectralSolver::check_mu(mu)?;
    SpectralSolver::new(prob).solve(mu)
}

pub fn power_curve(prob: &RegularizedProblem, mu: f64) -> Result<f64> {
    SpectralSolver::check_mu(mu)?;
    SpectralSolver::new(prob).power(mu)
}

pub fn find_mu(prob: &RegularizedProblem, settings: &BisectionSettings) -> Result<MuSolution> {
    SpectralSolver::new(prob).find_mu(settings)
}

/// Scale `w` into the ball `‖w‖² ≤ budget`; the exact solution of the
/// projection subproblem.
pub(crate) fn project_ball_factor(power: f64, budget: f64) -> f64 {
    if power > budget {
        (budget / power).sqrt()
    } else {
        1.0
    }
}
