//! Two-path processing: the AP ring is cut into two chains that both end at
//! the CPU, which fuses the two compressed estimates with a global LMMSE
//! combiner.

use crate::chain::ChainState;
use crate::error::{Error, Result};
use crate::linalg::{block_diag, c, hermitian_condition, hermitize, hpd_solve, trace_re, vstack, CMat, CVec};
use crate::metrics::sinr_ratio;

/// Condition number above which the fusion matrix is regularized.
pub const MAX_CONDITION: f64 = 1e12;

/// AP orderings of the two paths. AP `L−1` (0-based) sits next to the CPU;
/// path 1 covers APs `⌈L/2⌉−1, …, 0` and path 2 covers `⌈L/2⌉, …, L−1`, so
/// both arcs end beside the CPU. An odd AP goes to path 1.
pub fn split_paths(aps: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if aps < 2 {
        return Err(Error::Config(format!("two-path mode needs at least 2 APs, got {aps}")));
    }
    let first = aps.div_ceil(2);
    Ok(((0..first).rev().collect(), (first..aps).collect()))
}

/// What the CPU receives from one path: `s̃ʳ = Gʳ s + zʳ`, `zʳ ~ CN(0, Zʳ)`.
#[derive(Debug, Clone)]
pub struct PathSummary {
    pub s_tilde: CVec,
    /// `Gʳ = Σ_l Vʳ_l Hʳ_l`, `K × K`.
    pub g: CMat,
    /// `Zʳ = Σ_l σ² Vʳ_l Vʳ_lᴴ + Aʳ_l Qʳ_l Aʳ_lᴴ`.
    pub z: CMat,
    pub aps: usize,
}

pub fn summarize_path(chain: &ChainState) -> Result<PathSummary> {
    Ok(PathSummary {
        s_tilde: chain.s_tilde.clone(),
        g: chain.effective_channel()?,
        z: hermitize(&chain.effective_noise()),
        aps: chain.position,
    })
}

#[derive(Debug, Clone)]
pub struct FusedEstimate {
    /// `[s̃¹; s̃²]`.
    pub y: CVec,
    /// `[G¹; G²]`, `2K × K`.
    pub g: CMat,
    /// `blkdiag(Z¹, Z²)`.
    pub z: CMat,
    /// `V = p Gᴴ (p G Gᴴ + Z)⁻¹`, `K × 2K`.
    pub v: CMat,
    pub s_hat: CVec,
    pub aps: usize,
}

/// Adds `1e-12 · tr(X)/n · I` when `X` is worse conditioned than
/// [`MAX_CONDITION`].
fn regularized(x: &CMat) -> CMat {
    let x = hermitize(x);
    if hermitian_condition(&x) <= MAX_CONDITION {
        return x;
    }
    let n = x.nrows();
    let mut out = x;
    let shift = 1e-12 * trace_re(&out) / n as f64;
    for i in 0..n {
        out[(i, i)] += c(shift);
    }
    out
}

/// Global LMMSE fusion of the two path estimates.
pub fn fuse(first: &PathSummary, second: &PathSummary, power: f64) -> Result<FusedEstimate> {
    if first.g.shape() != second.g.shape() {
        return Err(Error::Dimension("paths serve different user sets".into()));
    }
    let g = vstack(&first.g, &second.g);
    let z = block_diag(&first.z, &second.z);
    let mut y = CVec::zeros(g.nrows());
    y.rows_mut(0, first.s_tilde.len()).copy_from(&first.s_tilde);
    y.rows_mut(first.s_tilde.len(), second.s_tilde.len()).copy_from(&second.s_tilde);

    let b = regularized(&(&g * g.adjoint() * c(power) + &z));
    // V = p Gᴴ B⁻¹  ⇔  Vᴴ = p B⁻¹ G
    let v = (hpd_solve(&b, &g, "fusion covariance")? * c(power)).adjoint();
    let s_hat = &v * &y;
    Ok(FusedEstimate { y, g, z, v, s_hat, aps: first.aps + second.aps })
}

/// Per-user SINR of the fused LMMSE estimate:
/// `p g_kᴴ (p Σ_{j≠k} g_j g_jᴴ + Z)⁻¹ g_k`.
pub fn sinr_fused(fused: &FusedEstimate, power: f64) -> Result<Vec<f64>> {
    lmmse_sinr(&fused.g, &fused.z, power)
}

/// LMMSE SINR of every user in `y = G s + z`, `s ~ CN(0, p I)`, `z ~ CN(0, Z)`.
///
/// With `B = p G Gᴴ + Z` and `a_k = g_kᴴ B⁻¹ g_k`, the matrix-inversion lemma
/// gives `p g_kᴴ (B − p g_k g_kᴴ)⁻¹ g_k = p a_k / (1 − p a_k)`.
pub fn lmmse_sinr(g: &CMat, z: &CMat, power: f64) -> Result<Vec<f64>> {
    let b = regularized(&(&(g * g.adjoint()) * c(power) + z));
    let x = hpd_solve(&b, g, "fusion covariance")?;
    Ok((0..g.ncols())
        .map(|k| {
            let a = power * g.column(k).dotc(&x.column(k)).re;
            sinr_ratio(a, (1.0 - a).max(f64::EPSILON))
        })
        .collect())
}

/// Per-user MSE of the LMMSE estimate in `y = G s + z`:
/// `diag(p I − p² Gᴴ (p G Gᴴ + Z)⁻¹ G)`.
pub fn lmmse_mse(g: &CMat, z: &CMat, power: f64) -> Result<Vec<f64>> {
    let b = regularized(&(&(g * g.adjoint()) * c(power) + z));
    let x = hpd_solve(&b, g, "fusion covariance")?;
    let e = g.adjoint() * x;
    Ok((0..g.ncols()).map(|k| power - power * power * e[(k, k)].re).collect())
}
