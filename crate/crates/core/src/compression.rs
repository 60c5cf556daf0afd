//! Fronthaul compression-noise design.
//!
//! A compressed estimate at rate `R` bits per sample is modelled as the
//! refined estimate plus independent Gaussian noise `q ~ CN(0, Q)` satisfying
//! `R = log2 det(P Q⁻¹ + I)`, where `P` is the correlation of the estimate
//! before compression. Three designs of `Q` are provided:
//!
//! * [`eiu`]: element-wise, `R/K` bits for every user.
//! * [`scnm`]: vector-wise, minimum `tr(Q)` under the log-det constraint.
//! * [`wsinm`]: vector-wise, minimum weighted interference-plus-noise via
//!   block coordinate descent over `Q` and per-user weights.

use std::f64::consts::LN_2;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, hermitize, real_diagonal, CMat};

/// Eigenmodes below this fraction of the largest eigenvalue carry no rate.
pub const NULL_MODE_TOL: f64 = 1e-12;
/// Bisection steps allowed when matching the rate constraint.
pub const MAX_BISECTION_ITERS: usize = 200;
/// Required accuracy of the rate constraint, in bits.
pub const RATE_TOL_BITS: f64 = 1e-9;
pub const BCD_MAX_ITERS: usize = 100;
pub const BCD_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CompressionOutcome {
    /// Compression-noise covariance.
    pub q: CMat,
    /// `log2 det(P Q⁻¹ + I)` over the support of `P`.
    pub achieved_rate: f64,
    /// Final per-user weights (WSINM only).
    pub weights: Option<DVector<f64>>,
    pub bcd_iters: usize,
    /// WSINM objective after every half-step of the descent.
    pub objective_trace: Vec<f64>,
}

impl CompressionOutcome {
    fn plain(q: CMat, achieved_rate: f64) -> Self {
        Self { q, achieved_rate, weights: None, bcd_iters: 0, objective_trace: Vec::new() }
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveRate(rate))
    }
}

/// Equal inter-user compression: every user gets `R/K` bits and
/// `Q[k,k] = P[k,k] / (2^{R/K} − 1)`.
pub fn eiu(p: &CMat, rate: f64) -> Result<CompressionOutcome> {
    check_rate(rate)?;
    let k = p.nrows();
    let bits = rate / k as f64;
    let denom = bits.exp2() - 1.0;
    if !(denom > 0.0) {
        return Err(Error::NonPositiveRate(bits));
    }
    let diag = real_diagonal(p);
    let q = CMat::from_diagonal(&DVector::from_iterator(k, diag.iter().map(|&v| c(v.max(0.0) / denom))));
    let achieved = diag.iter().filter(|&&v| v > 0.0).map(|&v| (v / (v / denom) + 1.0).log2()).sum();
    Ok(CompressionOutcome::plain(q, achieved))
}

/// Noise power of one eigenmode for multiplier `mu`: the positive root of
/// `d² + λ d − μ λ = 0`, written to avoid cancellation.
fn mode_noise(lambda: f64, mu: f64) -> f64 {
    2.0 * mu / (1.0 + (1.0 + 4.0 * mu / lambda).sqrt())
}

fn modes_rate(lambdas: &[f64], mu: f64) -> f64 {
    lambdas
        .iter()
        .map(|&l| {
            // λ/d = (1 + √(1 + 4μ/λ)) λ / (2μ)
            let snr = (1.0 + (1.0 + 4.0 * mu / l).sqrt()) * l / (2.0 * mu);
            snr.ln_1p() / LN_2
        })
        .sum()
}

/// Finds `μ` with `Σ log2(1 + λ_i/d_i(μ)) = rate`. The rate is strictly
/// decreasing in `μ`, so the root is bracketed geometrically and bisected in
/// log space.
fn solve_multiplier(lambdas: &[f64], rate: f64) -> Result<f64> {
    let f = |mu: f64| modes_rate(lambdas, mu) - rate;
    let mean = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    let (mut lo, mut hi) = (mean, mean);
    let mut guard = 0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 2100 || !hi.is_finite() {
            return Err(Error::Solver(format!("cannot bracket rate {rate} from above")));
        }
    }
    while f(lo) < 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 4200 || lo == 0.0 {
            return Err(Error::Solver(format!("cannot bracket rate {rate} from below")));
        }
    }
    let mut best = (f64::INFINITY, hi);
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = (lo * hi).sqrt();
        let g = f(mid);
        if g.abs() < best.0 {
            best = (g.abs(), mid);
        }
        if g == 0.0 || hi / lo - 1.0 < 4.0 * f64::EPSILON {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0 > RATE_TOL_BITS {
        return Err(Error::Solver(format!(
            "rate mismatch {:e} bits after {MAX_BISECTION_ITERS} bisection steps (target {rate}, bracket [{lo:e}, {hi:e}])",
            best.0
        )));
    }
    Ok(best.1)
}

/// Minimum-trace compression noise meeting the rate constraint with equality.
///
/// `Q` is restricted to the eigenbasis of `P`; each mode's noise follows from
/// the KKT condition with a common multiplier. Modes in the (numerical) null
/// space of `P` get neither rate nor noise.
pub fn scnm(p: &CMat, rate: f64) -> Result<CompressionOutcome> {
    check_rate(rate)?;
    let k = p.nrows();
    let eig = eigh(p);
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if lambda_max <= 0.0 {
        // nothing to describe
        return Ok(CompressionOutcome::plain(CMat::zeros(k, k), 0.0));
    }
    let active: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > NULL_MODE_TOL * lambda_max).collect();
    let lambdas: Vec<f64> = active.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mu = solve_multiplier(&lambdas, rate)?;

    let mut noise = DVector::from_element(k, c(0.0));
    for (&i, &l) in active.iter().zip(&lambdas) {
        noise[i] = c(mode_noise(l, mu));
    }
    let u = &eig.eigenvectors;
    let q = hermitize(&(u * CMat::from_diagonal(&noise) * u.adjoint()));
    Ok(CompressionOutcome::plain(q, modes_rate(&lambdas, mu)))
}

fn check_weights(w: &DVector<f64>, k: usize) -> Result<()> {
    if w.len() != k {
        return Err(Error::Dimension(format!("{} weights for {k} users", w.len())));
    }
    if let Some(bad) = w.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Config(format!("weights must be positive, got {bad}")));
    }
    Ok(())
}

/// Minimum `tr(W Q)` with `W = diag(w)`, solved through the congruence
/// `P̄ = W^½ P W^½`, `Q = W^-½ Q̄ W^-½`, which leaves the rate unchanged.
pub fn weighted_scnm(p: &CMat, rate: f64, w: &DVector<f64>) -> Result<CompressionOutcome> {
    check_weights(w, p.nrows())?;
    let root = w.map(|v| c(v.sqrt()));
    let inv_root = w.map(|v| c(1.0 / v.sqrt()));
    let p_bar = hermitize(&CMat::from_fn(p.nrows(), p.ncols(), |i, j| root[i] * p[(i, j)] * root[j]));
    let mut out = scnm(&p_bar, rate)?;
    let q_bar = &out.q;
    out.q = hermitize(&CMat::from_fn(p.nrows(), p.ncols(), |i, j| inv_root[i] * q_bar[(i, j)] * inv_root[j]));
    Ok(out)
}

/// The `Q`-independent part of every user's interference-plus-noise term:
/// `X_k = base_k + Q[k,k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceContext {
    pub base: Vec<f64>,
}

impl InterferenceContext {
    pub fn totals(&self, q: &CMat) -> Vec<f64> {
        self.base.iter().enumerate().map(|(k, b)| b + q[(k, k)].re).collect()
    }
}

/// Per-user summand `w X − log2 w` of the WSINM objective.
pub fn wsinm_summand(w: f64, x: f64) -> f64 {
    w * x - w.log2()
}

/// Minimizer of [`wsinm_summand`] over `w`: `1 / (ln 2 · X)`.
pub fn optimal_weight(x: f64) -> f64 {
    1.0 / (LN_2 * x)
}

/// Closed-form minimum of [`wsinm_summand`]: `1/ln2 + log2(ln2) + log2 X`.
pub fn summand_lower_bound(x: f64) -> f64 {
    1.0 / LN_2 + LN_2.log2() + x.log2()
}

fn wsinm_objective(w: &DVector<f64>, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(&w, &x)| wsinm_summand(w, x)).sum()
}

fn weights_for(x: &[f64]) -> Result<DVector<f64>> {
    for (user, &value) in x.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::DegenerateInterference { user, value });
        }
    }
    Ok(DVector::from_iterator(x.len(), x.iter().map(|&v| optimal_weight(v))))
}

/// Weighted sum interference-plus-noise minimization by block coordinate
/// descent, starting from unit weights (so the first `Q` step is SCNM).
pub fn wsinm(p: &CMat, rate: f64, ctx: &InterferenceContext) -> Result<CompressionOutcome> {
    let k = p.nrows();
    if ctx.base.len() != k {
        return Err(Error::Dimension(format!("context for {} users, P is {k}×{k}", ctx.base.len())));
    }
    let mut w = DVector::from_element(k, 1.0);
    let mut trace = Vec::with_capacity(2 * BCD_MAX_ITERS);
    let mut prev: Option<f64> = None;
    let mut last = None;
    let mut iters = 0;
    for _ in 0..BCD_MAX_ITERS {
        iters += 1;
        let step = weighted_scnm(p, rate, &w)?;
        let x = ctx.totals(&step.q);
        trace.push(wsinm_objective(&w, &x));
        w = weights_for(&x)?;
        let obj = wsinm_objective(&w, &x);
        trace.push(obj);
        last = Some(step);
        if let Some(before) = prev {
            if (before - obj).abs() <= BCD_REL_TOL * before.abs().max(1.0) {
                break;
            }
        }
        prev = Some(obj);
    }
    let mut out = last.expect("at least one BCD iteration");
    out.weights = Some(w);
    out.bcd_iters = iters;
    out.objective_trace = trace;
    Ok(out)
}
