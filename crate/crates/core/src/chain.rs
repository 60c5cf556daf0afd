//! Sequential (daisy-chain) LMMSE refinement along an ordered list of APs.
//!
//! AP `l` receives the compressed estimate `s̃_{l−1}` and its error
//! covariance `C_{l−1}`, refines it with the local observation `y_l`,
//! compresses the result for its outgoing link, and forwards it. The state
//! also tracks the pre-compression correlation `P_l` (input to the
//! compression design) and the combiner families `V_il`, `A_il` that express
//! `s̃_l` directly in terms of all observations and compression noises.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};

use crate::compression::{self, CompressionOutcome};
use crate::error::{Error, Result};
use crate::linalg::{
    correlated_normal, hermitize, hpd_solve, identity, psd_repair, psd_sqrt, scaled_identity, CMat, CVec,
};
use crate::metrics;

/// How each AP designs its compression noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompressionStrategy {
    /// Unlimited fronthaul: `Q_l = 0`.
    Infinite,
    Eiu,
    Scnm,
    Wsinm,
}

impl CompressionStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Infinite => "infinite",
            Self::Eiu => "eiu",
            Self::Scnm => "scnm",
            Self::Wsinm => "wsinm",
        }
    }
}

impl fmt::Display for CompressionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompressionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "infinite" | "inf" => Ok(Self::Infinite),
            "eiu" => Ok(Self::Eiu),
            "scnm" => Ok(Self::Scnm),
            "wsinm" => Ok(Self::Wsinm),
            other => Err(Error::Parse(format!("unknown compression strategy '{other}'"))),
        }
    }
}

/// How the correlation `P_l` of the pre-compression estimate is propagated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationModel {
    /// Assumes `E{s̃_{l−1} e_{l−1}ᴴ} = −Q_{l−1}` at every AP. This is exact
    /// for the first two APs of a chain only; further down the chain it
    /// neglects compression noise carried over from earlier APs.
    #[default]
    CompressionOnly,
    /// Propagates the cross-covariance `D_l = E{s̃_l e_lᴴ}` exactly:
    /// `D_l = D_{l−1} (I − Γ_l H_l)ᴴ − Q_l`.
    Tracked,
}

impl CorrelationModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CompressionOnly => "compression-only",
            Self::Tracked => "tracked",
        }
    }
}

impl FromStr for CorrelationModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "compression-only" => Ok(Self::CompressionOnly),
            "tracked" => Ok(Self::Tracked),
            other => Err(Error::Parse(format!("unknown correlation model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    /// Per-user transmit power `p`.
    pub power: f64,
    /// Receiver noise variance `σ²`.
    pub noise_variance: f64,
    pub correlation: CorrelationModel,
}

impl ChainParams {
    pub fn new(power: f64, noise_variance: f64) -> Self {
        Self { power, noise_variance, correlation: CorrelationModel::default() }
    }
}

/// Diagnostics of one AP's compression step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub rate: f64,
    pub achieved_rate: f64,
    pub bcd_iters: usize,
    /// The link carried no bits and the chain restarted after this AP.
    pub reset: bool,
}

/// Everything carried from one AP to the next, plus the histories needed to
/// evaluate SINR at the current position.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub params: ChainParams,
    /// Number of APs processed so far (`l`).
    pub position: usize,
    /// Compressed estimate `s̃_l`; zero when running without observations.
    pub s_tilde: CVec,
    /// Estimate before compression, `ŝ_l`.
    pub s_hat: CVec,
    /// Error covariance `C_l` of `s̃_l`.
    pub c: CMat,
    /// Correlation `P_l` of `ŝ_l`.
    pub p: CMat,
    /// Cross-covariance `D_l = E{s̃_l e_lᴴ}`.
    pub cross: CMat,
    /// `V_il` for `i = 1..l`, each `K × N`.
    pub v: Vec<CMat>,
    /// `A_il` for `i = 1..l`, each `K × K`.
    pub a: Vec<CMat>,
    /// Compression covariances `Q_i`, `i = 1..l`.
    pub q: Vec<CMat>,
    /// Realized compression noises; zeros in statistics-only runs.
    pub q_realized: Vec<CVec>,
    /// Channels of the APs processed so far.
    pub h: Vec<CMat>,
    pub reports: Vec<StepReport>,
}

impl ChainState {
    /// State before AP 1: `C_0 = p I`, `s̃_0 = 0`, `P_0 = Q_0 = 0`.
    pub fn new(users: usize, params: ChainParams) -> Self {
        Self {
            params,
            position: 0,
            s_tilde: CVec::zeros(users),
            s_hat: CVec::zeros(users),
            c: scaled_identity(users, params.power),
            p: CMat::zeros(users, users),
            cross: CMat::zeros(users, users),
            v: Vec::new(),
            a: Vec::new(),
            q: Vec::new(),
            q_realized: Vec::new(),
            h: Vec::new(),
            reports: Vec::new(),
        }
    }

    pub fn users(&self) -> usize {
        self.c.nrows()
    }

    /// `Q_{l}` of the last processed AP (zero before AP 1).
    pub fn last_q(&self) -> CMat {
        self.q.last().cloned().unwrap_or_else(|| CMat::zeros(self.users(), self.users()))
    }

    /// Processes the next AP using second-order statistics only.
    pub fn step(&mut self, h: &CMat, rate: f64, strategy: CompressionStrategy) -> Result<()> {
        self.advance(h, rate, strategy, None)
    }

    /// Processes the next AP with a realized observation `y`; compression
    /// noise is drawn from `rng`.
    pub fn step_observed<R: RngCore>(
        &mut self,
        h: &CMat,
        y: &CVec,
        rate: f64,
        strategy: CompressionStrategy,
        rng: &mut R,
    ) -> Result<()> {
        self.advance(h, rate, strategy, Some((y, rng as &mut dyn RngCore)))
    }

    fn advance(
        &mut self,
        h: &CMat,
        rate: f64,
        strategy: CompressionStrategy,
        obs: Option<(&CVec, &mut dyn RngCore)>,
    ) -> Result<()> {
        let k = self.users();
        if h.ncols() != k {
            return Err(Error::Dimension(format!("channel has {} users, chain has {k}", h.ncols())));
        }
        if !(rate >= 0.0) {
            return Err(Error::NonPositiveRate(rate));
        }
        let noise_variance = self.params.noise_variance;
        let gamma = gain(&self.c, h, noise_variance)?;
        let q_prev = self.last_q();

        let mut rng_slot = None;
        if let Some((y, rng)) = obs {
            self.s_hat = refine(&self.s_tilde, &gamma, h, y)?;
            rng_slot = Some(rng);
        }
        let p_new = match self.params.correlation {
            CorrelationModel::Tracked => {
                update_pre_compression_corr_tracked(&self.p, &q_prev, &self.cross, &self.c, &gamma, h)?
            }
            CorrelationModel::CompressionOnly => update_pre_compression_corr(&self.p, &q_prev, &self.c, &gamma, h)?,
        };
        self.h.push(h.clone());
        propagate_combiners(&mut self.v, &mut self.a, &gamma, h);

        let zero_rate = rate == 0.0 && strategy != CompressionStrategy::Infinite;
        let outcome = if zero_rate { None } else { Some(self.compress(&p_new, rate, strategy)?) };

        let q_l = outcome.as_ref().map_or_else(|| CMat::zeros(k, k), |o| o.q.clone());
        self.c = update_error_cov(&self.c, &gamma, h, &q_l)?;
        self.cross = update_cross_cov(&self.cross, &gamma, h, &q_l);
        self.p = p_new;
        self.position += 1;

        let realized = match rng_slot {
            Some(rng) if outcome.is_some() => {
                let q_sample = correlated_normal(rng, &psd_sqrt(&q_l));
                self.s_tilde = &self.s_hat + &q_sample;
                q_sample
            }
            Some(_) => {
                self.s_tilde = self.s_hat.clone();
                CVec::zeros(k)
            }
            None => CVec::zeros(k),
        };
        self.q.push(q_l);
        self.q_realized.push(realized);

        self.reports.push(StepReport {
            rate,
            achieved_rate: outcome.as_ref().map_or(if zero_rate { 0.0 } else { f64::INFINITY }, |o| o.achieved_rate),
            bcd_iters: outcome.as_ref().map_or(0, |o| o.bcd_iters),
            reset: zero_rate,
        });

        if zero_rate {
            self.reset_after_silent_link();
        }
        Ok(())
    }

    fn compress(&self, p: &CMat, rate: f64, strategy: CompressionStrategy) -> Result<CompressionOutcome> {
        let k = self.users();
        match strategy {
            CompressionStrategy::Infinite => Ok(CompressionOutcome {
                q: CMat::zeros(k, k),
                achieved_rate: f64::INFINITY,
                weights: None,
                bcd_iters: 0,
                objective_trace: Vec::new(),
            }),
            CompressionStrategy::Eiu => compression::eiu(p, rate),
            CompressionStrategy::Scnm => compression::scnm(p, rate),
            CompressionStrategy::Wsinm => {
                let l = self.position + 1;
                let ctx = metrics::interference_context(
                    &self.h,
                    &self.v,
                    &self.a,
                    &self.q[..l - 1],
                    self.params.power,
                    self.params.noise_variance,
                )?;
                compression::wsinm(p, rate, &ctx)
            }
        }
    }

    /// A link with zero bits conveys nothing: the next AP starts from the
    /// prior, and nothing observed so far reaches the output.
    fn reset_after_silent_link(&mut self) {
        let k = self.users();
        self.s_tilde = CVec::zeros(k);
        self.c = scaled_identity(k, self.params.power);
        self.p = CMat::zeros(k, k);
        self.cross = CMat::zeros(k, k);
        for m in self.v.iter_mut().chain(self.a.iter_mut()) {
            m.fill(crate::linalg::c(0.0));
        }
        if let Some(last) = self.q.last_mut() {
            last.fill(crate::linalg::c(0.0));
        }
    }

    /// SINR of every user's compressed estimate at the current position.
    pub fn sinr(&self) -> Result<Vec<f64>> {
        let l = self.position;
        if l == 0 {
            return Ok(vec![0.0; self.users()]);
        }
        metrics::sinr_chain(
            &self.h,
            &self.v,
            &self.a,
            &self.q[..l - 1],
            &self.q[l - 1],
            self.params.power,
            self.params.noise_variance,
        )
    }

    /// `Σ_i V_il y_i + Σ_i A_il q_i` for the given observations and the
    /// realized compression noises. Equals `s̃_l` when the chain ran on
    /// the same observations.
    pub fn expansion(&self, observations: &[CVec]) -> Result<CVec> {
        if observations.len() != self.position {
            return Err(Error::Dimension(format!("{} observations for {} APs", observations.len(), self.position)));
        }
        let mut out = CVec::zeros(self.users());
        for (((v, a), q), y) in self.v.iter().zip(&self.a).zip(&self.q_realized).zip(observations) {
            out += v * y + a * q;
        }
        Ok(out)
    }

    /// `Σ_i V_il H_i`.
    pub fn effective_channel(&self) -> Result<CMat> {
        metrics::effective_channel(&self.h, &self.v)
    }

    /// `Σ_i σ² V_il V_ilᴴ + A_il Q_i A_ilᴴ`.
    pub fn effective_noise(&self) -> CMat {
        metrics::noise_image(&self.v, self.params.noise_variance)
            + metrics::compression_image(self.users(), &self.a, &self.q)
    }
}

/// Combining matrix `Γ_l = C H ᴴ (H C Hᴴ + σ² I)⁻¹`, computed as a
/// Hermitian positive-definite solve.
pub fn gain(c_prev: &CMat, h: &CMat, sigma2: f64) -> Result<CMat> {
    if !(sigma2 > 0.0) {
        return Err(Error::Config(format!("noise variance must be positive, got {sigma2}")));
    }
    if c_prev.nrows() != h.ncols() {
        return Err(Error::Dimension(format!(
            "C is {}×{}, H is {}×{}",
            c_prev.nrows(),
            c_prev.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    let hc = h * c_prev;
    let mut s = &hc * h.adjoint();
    for i in 0..s.nrows() {
        s[(i, i)] += crate::linalg::c(sigma2);
    }
    // Γᴴ = S⁻¹ H C
    Ok(hpd_solve(&s, &hc, "innovation covariance")?.adjoint())
}

/// `ŝ_l = s̃_{l−1} + Γ_l (y_l − H_l s̃_{l−1})`.
pub fn refine(s_prev: &CVec, gamma: &CMat, h: &CMat, y: &CVec) -> Result<CVec> {
    if y.len() != h.nrows() || s_prev.len() != h.ncols() || gamma.shape() != (h.ncols(), h.nrows()) {
        return Err(Error::Dimension(format!(
            "y has {} entries, H is {}×{}, s̃ has {}",
            y.len(),
            h.nrows(),
            h.ncols(),
            s_prev.len()
        )));
    }
    Ok(s_prev + gamma * (y - h * s_prev))
}

/// `P_l = P_{l−1} + Q_{l−1} + Γ H C_{l−1} − Q_{l−1} Hᴴ Γᴴ − Γ H Q_{l−1}`.
pub fn update_pre_compression_corr(
    p_prev: &CMat,
    q_prev: &CMat,
    c_prev: &CMat,
    gamma: &CMat,
    h: &CMat,
) -> Result<CMat> {
    let gh = gamma * h;
    let raw = p_prev + q_prev + &gh * c_prev - q_prev * gh.adjoint() - &gh * q_prev;
    psd_repair(&raw, "pre-compression correlation P_l")
}

/// `P_l = P_{l−1} + Q_{l−1} + Γ H C_{l−1} + D_{l−1} Hᴴ Γᴴ + Γ H D_{l−1}ᴴ`
/// with the tracked cross-covariance `D_{l−1} = E{s̃_{l−1} e_{l−1}ᴴ}`.
/// Reduces to [`update_pre_compression_corr`] when `D_{l−1} = −Q_{l−1}`.
pub fn update_pre_compression_corr_tracked(
    p_prev: &CMat,
    q_prev: &CMat,
    cross_prev: &CMat,
    c_prev: &CMat,
    gamma: &CMat,
    h: &CMat,
) -> Result<CMat> {
    let gh = gamma * h;
    let raw = p_prev + q_prev + &gh * c_prev + cross_prev * gh.adjoint() + &gh * cross_prev.adjoint();
    psd_repair(&raw, "pre-compression correlation P_l")
}

/// `D_l = D_{l−1} (I − Γ H)ᴴ − Q_l`.
pub fn update_cross_cov(cross_prev: &CMat, gamma: &CMat, h: &CMat, q: &CMat) -> CMat {
    let k = cross_prev.nrows();
    cross_prev * (identity(k) - gamma * h).adjoint() - q
}

/// `C_l = (I − Γ H) C_{l−1} + Q_l`.
pub fn update_error_cov(c_prev: &CMat, gamma: &CMat, h: &CMat, q: &CMat) -> Result<CMat> {
    let k = c_prev.nrows();
    let raw = (identity(k) - gamma * h) * c_prev + q;
    psd_repair(&hermitize(&raw), "error covariance C_l")
}

/// Advances `V_il`, `A_il` from position `l−1` to `l`:
/// `V_il = (I − Γ_l H_l) V_{i(l−1)}`, `V_ll = Γ_l`, and likewise for `A`
/// with `A_ll = I`.
pub fn propagate_combiners(v: &mut Vec<CMat>, a: &mut Vec<CMat>, gamma: &CMat, h: &CMat) {
    let k = gamma.nrows();
    let t = identity(k) - gamma * h;
    for m in v.iter_mut().chain(a.iter_mut()) {
        *m = &t * &*m;
    }
    v.push(gamma.clone());
    a.push(identity(k));
}

/// Runs a whole chain on second-order statistics.
pub fn run_chain(
    params: ChainParams,
    channels: &[CMat],
    strategy: CompressionStrategy,
    rates: &[f64],
) -> Result<ChainState> {
    check_chain(channels, rates)?;
    let mut state = ChainState::new(channels[0].ncols(), params);
    for (h, &r) in channels.iter().zip(rates) {
        state.step(h, r, strategy)?;
    }
    Ok(state)
}

/// Runs a whole chain on realized observations `y_l`, drawing compression
/// noise from `rng`.
pub fn run_chain_observed<R: Rng>(
    params: ChainParams,
    channels: &[CMat],
    observations: &[CVec],
    strategy: CompressionStrategy,
    rates: &[f64],
    rng: &mut R,
) -> Result<ChainState> {
    check_chain(channels, rates)?;
    if observations.len() != channels.len() {
        return Err(Error::Dimension(format!("{} observations for {} APs", observations.len(), channels.len())));
    }
    let mut state = ChainState::new(channels[0].ncols(), params);
    for ((h, y), &r) in channels.iter().zip(observations).zip(rates) {
        state.step_observed(h, y, r, strategy, rng)?;
    }
    Ok(state)
}

fn check_chain(channels: &[CMat], rates: &[f64]) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::Dimension("empty AP chain".into()));
    }
    if channels.len() != rates.len() {
        return Err(Error::Dimension(format!("{} APs but {} rates", channels.len(), rates.len())));
    }
    Ok(())
}
