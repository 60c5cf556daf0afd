//! Independent oracles shared by the integration suites. Everything here is
//! computed with explicit LU inverses on the stacked centralized model and
//! never calls into the recursive estimator.
#![allow(dead_code)]

use daisychain_core::linalg::{c, complex_normal, CMat, CVec};
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, var: f64) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng, var))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, var: f64) -> CVec {
    CVec::from_fn(n, |_, _| complex_normal(rng, var))
}

pub fn random_psd<R: Rng>(rng: &mut R, k: usize, scale: f64) -> CMat {
    let b = random_matrix(rng, k, k, scale);
    let x = &b * b.adjoint();
    (&x + x.adjoint()) * c(0.5)
}

pub fn stack(blocks: &[CMat]) -> CMat {
    let k = blocks[0].ncols();
    let m: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(m, k);
    let mut r = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..k {
                out[(r + i, j)] = b[(i, j)];
            }
        }
        r += b.nrows();
    }
    out
}

pub fn stack_vec(blocks: &[CVec]) -> CVec {
    let all: Vec<_> = blocks.iter().flat_map(|b| b.iter().cloned()).collect();
    CVec::from_vec(all)
}

fn inverse(x: &CMat) -> CMat {
    x.clone().try_inverse().expect("invertible")
}

/// `p Hᴴ (p H Hᴴ + σ² I)⁻¹`.
pub fn centralized_combiner(h: &CMat, p: f64, sigma2: f64) -> CMat {
    let m = h.nrows();
    let s = h * h.adjoint() * c(p) + CMat::identity(m, m) * c(sigma2);
    h.adjoint() * inverse(&s) * c(p)
}

/// Error covariance `p I − p² Hᴴ (p H Hᴴ + σ² I)⁻¹ H`.
pub fn centralized_error_cov(h: &CMat, p: f64, sigma2: f64) -> CMat {
    let k = h.ncols();
    let w = centralized_combiner(h, p, sigma2);
    CMat::identity(k, k) * c(p) - &w * h * c(p)
}

/// `p h_kᴴ (p Σ_{j≠k} h_j h_jᴴ + Z)⁻¹ h_k` for noise covariance `Z`.
pub fn lmmse_sinr_oracle(h: &CMat, z: &CMat, p: f64) -> Vec<f64> {
    (0..h.ncols())
        .map(|k| {
            let mut cov = z.clone();
            for j in (0..h.ncols()).filter(|&j| j != k) {
                let hj = h.column(j);
                cov += hj * hj.adjoint() * c(p);
            }
            let hk = h.column(k).into_owned();
            p * (hk.adjoint() * inverse(&cov) * &hk)[(0, 0)].re
        })
        .collect()
}

pub fn centralized_sinr(h: &CMat, p: f64, sigma2: f64) -> Vec<f64> {
    let m = h.nrows();
    lmmse_sinr_oracle(h, &(CMat::identity(m, m) * c(sigma2)), p)
}

pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_err_vec(a: &CVec, b: &CVec) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_err_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) / y.abs().max(f64::MIN_POSITIVE)).abs()).fold(0.0, f64::max)
}

/// `log2 det(P Q⁻¹ + I)` via determinants of full-rank matrices.
pub fn rate_of(p: &CMat, q: &CMat) -> f64 {
    ((p + q).determinant().re / q.clone().determinant().re).log2()
}
