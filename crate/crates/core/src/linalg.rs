//! Small complex linear-algebra helpers shared by the estimator and the
//! compression solvers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative eigenvalue floor separating round-off from a genuine loss of
/// semi-definiteness.
pub const PSD_TOL: f64 = 1e-10;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scaled_identity(n: usize, s: f64) -> CMat {
    CMat::from_diagonal_element(n, n, c(s))
}

/// `(X + Xᴴ) / 2`.
pub fn hermitize(x: &CMat) -> CMat {
    (x + x.adjoint()) * c(0.5)
}

/// Real diagonal of a (Hermitian) matrix.
pub fn real_diagonal(x: &CMat) -> Vec<f64> {
    (0..x.nrows()).map(|i| x[(i, i)].re).collect()
}

pub fn trace_re(x: &CMat) -> f64 {
    (0..x.nrows()).map(|i| x[(i, i)].re).sum()
}

/// Largest absolute entry, used as the scale for relative tolerances.
pub fn max_abs(x: &CMat) -> f64 {
    x.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Relative Frobenius distance `‖a − b‖ / max(‖b‖, tiny)`.
pub fn rel_frobenius(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn eigh(x: &CMat) -> SymmetricEigen<C64, Dyn> {
    SymmetricEigen::new(hermitize(x))
}

/// Symmetrizes `x` and clips eigenvalues in `[-PSD_TOL·‖x‖, 0)` to zero.
/// Anything more negative is reported as an error.
pub fn psd_repair(x: &CMat, what: &'static str) -> Result<CMat> {
    let h = hermitize(x);
    let eig = SymmetricEigen::new(h.clone());
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = -PSD_TOL * scale;
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NotPsd { what, eigenvalue: min, floor });
    }
    if min < floor {
        return Err(Error::NotPsd { what, eigenvalue: min, floor });
    }
    if min >= 0.0 {
        return Ok(h);
    }
    let clipped = eig.eigenvalues.map(|v| c(v.max(0.0)));
    let u = &eig.eigenvectors;
    Ok(hermitize(&(u * CMat::from_diagonal(&clipped) * u.adjoint())))
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn hpd_solve(a: &CMat, b: &CMat, what: &'static str) -> Result<CMat> {
    let chol = Cholesky::new(hermitize(a)).ok_or(Error::NotPositiveDefinite(what))?;
    Ok(chol.solve(b))
}

/// Hermitian square-root factor `F` with `F Fᴴ = X` for PSD `X`.
pub fn psd_sqrt(x: &CMat) -> CMat {
    let eig = eigh(x);
    let roots = eig.eigenvalues.map(|v| c(v.max(0.0).sqrt()));
    let u = &eig.eigenvectors;
    u * CMat::from_diagonal(&roots) * u.adjoint()
}

/// Ratio of extreme eigenvalues of a Hermitian matrix (∞ when singular).
pub fn hermitian_condition(x: &CMat) -> f64 {
    let eig = eigh(x);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// One draw of `CN(0, variance)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// `n` i.i.d. `CN(0, variance)` entries.
pub fn complex_normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, variance: f64) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng, variance))
}

/// A draw of `CN(0, X)` given a square-root factor of `X`.
pub fn correlated_normal<R: Rng + ?Sized>(rng: &mut R, sqrt_cov: &CMat) -> CVec {
    let w = complex_normal_vec(rng, sqrt_cov.ncols(), 1.0);
    sqrt_cov * w
}

/// `blkdiag(a, b)`.
pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = CMat::zeros(n, m);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    out
}

/// Stacks `a` on top of `b`.
pub fn vstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}
