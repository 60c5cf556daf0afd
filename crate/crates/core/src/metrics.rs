//! Per-user SINR and spectral efficiency of a chain's compressed estimate.
//!
//! With `G = Σ_i V_il H_i`, user `k`'s estimate is
//! `G[k,k] s_k + Σ_{j≠k} G[k,j] s_j + (noise image) + (compression image)`,
//! and `X_kl` collects everything except the desired term.

use crate::compression::InterferenceContext;
use crate::error::{Error, Result};
use crate::linalg::{c, hermitize, CMat};

/// `Σ_i V_i H_i`.
pub fn effective_channel(h: &[CMat], v: &[CMat]) -> Result<CMat> {
    if h.len() != v.len() || h.is_empty() {
        return Err(Error::Dimension(format!("{} channels vs {} combiners", h.len(), v.len())));
    }
    let k = v[0].nrows();
    let mut g = CMat::zeros(k, h[0].ncols());
    for (hi, vi) in h.iter().zip(v) {
        g.gemm(c(1.0), vi, hi, c(1.0));
    }
    Ok(g)
}

/// `σ² Σ_i V_i V_iᴴ`.
pub fn noise_image(v: &[CMat], sigma2: f64) -> CMat {
    let k = v.first().map_or(0, |m| m.nrows());
    let mut out = CMat::zeros(k, k);
    for vi in v {
        out.gemm(c(sigma2), vi, &vi.adjoint(), c(1.0));
    }
    hermitize(&out)
}

/// `Σ_i A_i Q_i A_iᴴ` over the pairs present in both slices.
pub fn compression_image(users: usize, a: &[CMat], q: &[CMat]) -> CMat {
    let mut out = CMat::zeros(users, users);
    for (ai, qi) in a.iter().zip(q) {
        out += ai * qi * ai.adjoint();
    }
    hermitize(&out)
}

fn interference_terms(g: &CMat, p: f64) -> Vec<f64> {
    (0..g.nrows()).map(|k| p * (0..g.ncols()).filter(|&j| j != k).map(|j| g[(k, j)].norm_sqr()).sum::<f64>()).collect()
}

/// `X_kl − Q_l[k,k]` for every user, given channels, combiners
/// `V_il, A_il` for `i = 1..l`, and the compression covariances of APs
/// `1..l−1`.
pub fn interference_context(
    h: &[CMat],
    v: &[CMat],
    a: &[CMat],
    q_prior: &[CMat],
    p: f64,
    sigma2: f64,
) -> Result<InterferenceContext> {
    if a.len() != v.len() || q_prior.len() + 1 != v.len() {
        return Err(Error::Dimension(format!(
            "{} V, {} A and {} prior Q for one chain position",
            v.len(),
            a.len(),
            q_prior.len()
        )));
    }
    let g = effective_channel(h, v)?;
    let noise = noise_image(v, sigma2);
    let comp = compression_image(g.nrows(), &a[..q_prior.len()], q_prior);
    let inter = interference_terms(&g, p);
    let base = (0..g.nrows()).map(|k| inter[k] + noise[(k, k)].re + comp[(k, k)].re).collect();
    Ok(InterferenceContext { base })
}

/// SINR of every user's compressed estimate at chain position `l`.
pub fn sinr_chain(
    h: &[CMat],
    v: &[CMat],
    a: &[CMat],
    q_prior: &[CMat],
    q_current: &CMat,
    p: f64,
    sigma2: f64,
) -> Result<Vec<f64>> {
    let ctx = interference_context(h, v, a, q_prior, p, sigma2)?;
    let g = effective_channel(h, v)?;
    let x = ctx.totals(q_current);
    Ok((0..g.nrows()).map(|k| sinr_ratio(p * g[(k, k)].norm_sqr(), x[k])).collect())
}

pub(crate) fn sinr_ratio(signal: f64, interference: f64) -> f64 {
    if signal == 0.0 {
        0.0
    } else {
        signal / interference
    }
}

/// Spectral efficiency of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SeReport {
    pub sinr: Vec<f64>,
    pub se: Vec<f64>,
    pub sum_se: f64,
    /// `τ_u / τ_c`.
    pub prelog: f64,
}

pub fn se_from_sinr(sinr: &[f64], uplink_samples: usize, coherence_samples: usize) -> SeReport {
    let prelog = uplink_samples as f64 / coherence_samples as f64;
    let se: Vec<f64> = sinr.iter().map(|&s| prelog * s.max(0.0).ln_1p() / std::f64::consts::LN_2).collect();
    SeReport { sinr: sinr.to_vec(), sum_se: se.iter().sum(), se, prelog }
}
