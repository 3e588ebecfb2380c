//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// Power-iteration settings used by [`lambda_max`].
const POWER_ITER_TOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 1000;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Largest absolute deviation of `a` from Hermitian symmetry.
pub fn hermitian_defect(a: &CMat) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn fro_norm_sq(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn vec_norm_sq(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVec, b: &CVec) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch in max_abs_diff_vec");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `Re tr(A)`.
pub fn re_trace(a: &CMat) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// `Re tr(A B)` without forming the product.
pub fn re_trace_product(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// Eigendecomposition of the Hermitian part of `a`; eigenvalues ascending.
pub fn hermitian_eigen(a: &CMat) -> (DVector<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let (values, _) = hermitian_eigen(a);
    values[0]
}

pub fn max_eigenvalue_dense(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let (values, _) = hermitian_eigen(a);
    values[values.len() - 1]
}

/// Largest eigenvalue of a Hermitian positive-semidefinite matrix.
///
/// Power iteration stopped once the eigen-residual `‖Av − λv‖` drops below
/// `1e-10·λ`; falls back to a full eigendecomposition when the iteration
/// stalls or hits its cap.
pub fn lambda_max(a: &CMat) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return a[(0, 0)].re;
    }
    // Deterministic, non-symmetric start so it is not orthogonal to the
    // dominant eigenvector for structured inputs.
    let mut v = CVec::from_fn(n, |i, _| c(1.0 + 0.1 * i as f64, 0.05 * (i as f64 + 1.0)));
    let n0 = v.norm();
    v /= c(n0, 0.0);
    for _ in 0..POWER_ITER_MAX {
        let w = a * &v;
        let lambda = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 || !wn.is_finite() {
            break;
        }
        let residual = (&w - &v * c(lambda, 0.0)).norm();
        if lambda > 0.0 && residual <= POWER_ITER_TOL * lambda {
            return lambda;
        }
        v = w / c(wn, 0.0);
    }
    max_eigenvalue_dense(a)
}

/// Cholesky factor of the Hermitian part of `a`, or `None` unless it is
/// positive definite. The complex square root never fails, so a negative
/// pivot shows up as a non-real diagonal entry and is rejected here.
fn hpd_cholesky(a: &CMat) -> Option<Cholesky<C64, Dyn>> {
    let chol = hermitian_part(a).cholesky()?;
    let l = chol.l_dirty();
    let ok = (0..a.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-8 * d.re
    });
    ok.then_some(chol)
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn hpd_inverse(a: &CMat) -> Option<CMat> {
    Some(hpd_cholesky(a)?.inverse())
}

/// `ln det(A)` for Hermitian positive-definite `A`.
pub fn hpd_logdet(a: &CMat) -> Option<f64> {
    let chol = hpd_cholesky(a)?;
    let l = chol.l_dirty();
    Some(2.0 * (0..a.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

/// Solve `A X = B` for Hermitian positive-definite `A`.
pub fn hpd_solve(a: &CMat, b: &CMat) -> Option<CMat> {
    Some(hpd_cholesky(a)?.solve(b))
}

/// Real-valued matrix helper for tests and oracles.
pub fn real_matrix(a: &DMatrix<f64>) -> CMat {
    a.map(|x| c(x, 0.0))
}
