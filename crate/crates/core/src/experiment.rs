//! Monte-Carlo sweeps over user count or total fronthaul rate.
//!
//! Every trial drops users and draws channels once from a stream derived
//! from `(seed, trial)`, then evaluates all strategies on that same drop, so
//! strategy comparisons are paired and adding a strategy never changes the
//! draws seen by the others.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::allocation::AllocationScheme;
use crate::chain::{run_chain, run_chain_observed, ChainParams, ChainState, CompressionStrategy, CorrelationModel};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::fusion::{fuse, sinr_fused, split_paths, summarize_path};
use crate::geometry::{draw_channels, place_network, ChannelRealization};
use crate::linalg::{complex_normal_vec, CMat, CVec};
use crate::metrics::{se_from_sinr, SeReport};

/// Allowed fraction of failed trials per strategy and sweep point.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
/// Relative tolerance of the optional reconstruction self-check.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathMode {
    Single,
    Two,
}

impl PathMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Single => "sp",
            Self::Two => "tp",
        }
    }
}

impl FromStr for PathMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sp" => Ok(Self::Single),
            "tp" => Ok(Self::Two),
            other => Err(Error::Parse(format!("unknown path mode '{other}'"))),
        }
    }
}

/// One curve of a sweep: path mode, AP budget split and compression design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub path: PathMode,
    pub allocation: AllocationScheme,
    pub compression: CompressionStrategy,
}

impl Strategy {
    pub fn new(path: PathMode, allocation: AllocationScheme, compression: CompressionStrategy) -> Self {
        Self { path, allocation, compression }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.path.as_str(), self.allocation, self.compression)
    }
}

/// Parses `sp-ef-wsinm` style triples (`:` also accepted as separator).
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(['-', ':']).collect();
        match parts.as_slice() {
            [p, a, c] => Ok(Self::new(p.parse()?, a.parse()?, c.parse()?)),
            _ => Err(Error::Parse(format!("strategy '{s}' is not path-allocation-compression"))),
        }
    }
}

pub fn parse_strategies(list: &str) -> Result<Vec<Strategy>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Users(Vec<usize>),
    Rate(Vec<f64>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            Self::Users(v) => v.len(),
            Self::Rate(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn points(&self, base: &NetworkConfig) -> Vec<(f64, NetworkConfig)> {
        match self {
            Self::Users(ks) => ks.iter().map(|&k| (k as f64, NetworkConfig { users: k, ..base.clone() })).collect(),
            Self::Rate(rs) => rs.iter().map(|&r| (r, NetworkConfig { total_rate: r, ..base.clone() })).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Network parameters; `trials` and `rng_seed` drive the Monte-Carlo loop.
    pub base: NetworkConfig,
    pub sweep: SweepAxis,
    pub strategies: Vec<Strategy>,
    pub options: RunOptions,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub correlation: CorrelationModel,
    /// Also run every chain on realized signals and verify that the
    /// recursive estimate equals its combiner expansion.
    pub check_reconstruction: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::Config("empty sweep axis".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies selected".into()));
        }
        for (_, cfg) in self.sweep.points(&self.base) {
            cfg.validate()?;
            for s in &self.strategies {
                check_strategy(&cfg, s)?;
            }
        }
        Ok(())
    }
}

fn check_strategy(cfg: &NetworkConfig, s: &Strategy) -> Result<()> {
    if s.compression != CompressionStrategy::Infinite && !(cfg.total_rate > 0.0) {
        return Err(Error::Config(format!("{s} needs a positive total rate")));
    }
    let shortest = match s.path {
        PathMode::Single => cfg.aps,
        PathMode::Two => {
            split_paths(cfg.aps)?;
            cfg.aps / 2
        }
    };
    if s.allocation == AllocationScheme::Logarithmic && shortest < 2 && s.compression != CompressionStrategy::Infinite {
        return Err(Error::Config(format!("{s} needs chains of at least 2 APs")));
    }
    Ok(())
}

/// Stream for trial `t`: seeded by the master seed, stream id `t`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Separate stream for the realized signals of the reconstruction check.
fn signal_rng(seed: u64, trial: u64, strategy: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5167_4A15_u64);
    rng.set_stream(trial.wrapping_mul(1 << 16).wrapping_add(strategy as u64));
    rng
}

/// Draws the user layout and channels of one trial.
pub fn draw_trial(cfg: &NetworkConfig, trial: u64) -> Result<ChannelRealization> {
    let mut rng = trial_rng(cfg.rng_seed, trial);
    let layout = place_network(cfg, &mut rng);
    draw_channels(cfg, &layout, &mut rng)
}

fn chain_rates(s: &Strategy, budget: f64, len: usize) -> Result<Vec<f64>> {
    if s.compression == CompressionStrategy::Infinite {
        return Ok(vec![f64::INFINITY; len]);
    }
    Ok(s.allocation.schedule(budget, len)?.rates)
}

fn run_one(
    cfg: &NetworkConfig,
    correlation: CorrelationModel,
    channels: &[CMat],
    s: &Strategy,
    budget: f64,
    signals: Option<&mut ChaCha8Rng>,
) -> Result<ChainState> {
    let params = ChainParams { correlation, ..ChainParams::new(cfg.power, cfg.noise_variance) };
    let rates = chain_rates(s, budget, channels.len())?;
    match signals {
        None => run_chain(params, channels, s.compression, &rates),
        Some(rng) => {
            let k = cfg.users;
            let x = complex_normal_vec(rng, k, cfg.power);
            let ys: Vec<CVec> =
                channels.iter().map(|h| h * &x + complex_normal_vec(rng, h.nrows(), cfg.noise_variance)).collect();
            let state = run_chain_observed(params, channels, &ys, s.compression, &rates, rng)?;
            let expanded = state.expansion(&ys)?;
            let err = (&expanded - &state.s_tilde).norm() / state.s_tilde.norm().max(f64::MIN_POSITIVE);
            if err > RECONSTRUCTION_TOL && state.s_tilde.norm() > 0.0 {
                return Err(Error::Solver(format!("reconstruction mismatch {err:e}")));
            }
            Ok(state)
        }
    }
}

/// Spectral efficiency of one strategy on one channel drop.
pub fn evaluate_strategy(
    cfg: &NetworkConfig,
    correlation: CorrelationModel,
    channels: &ChannelRealization,
    s: &Strategy,
) -> Result<SeReport> {
    evaluate_with(cfg, correlation, channels, s, None)
}

fn evaluate_with(
    cfg: &NetworkConfig,
    correlation: CorrelationModel,
    channels: &ChannelRealization,
    s: &Strategy,
    mut signals: Option<&mut ChaCha8Rng>,
) -> Result<SeReport> {
    let sinr = match s.path {
        PathMode::Single => {
            let order: Vec<usize> = (0..cfg.aps).collect();
            run_one(cfg, correlation, &channels.subset(&order), s, cfg.total_rate, signals)?.sinr()?
        }
        PathMode::Two => {
            let (first, second) = split_paths(cfg.aps)?;
            let mut summaries = Vec::with_capacity(2);
            for order in [&first, &second] {
                // each path gets a share of the budget proportional to its length
                let budget = cfg.total_rate * order.len() as f64 / cfg.aps as f64;
                let state = run_one(cfg, correlation, &channels.subset(order), s, budget, signals.as_deref_mut())?;
                summaries.push(summarize_path(&state)?);
            }
            let fused = fuse(&summaries[0], &summaries[1], cfg.power)?;
            sinr_fused(&fused, cfg.power)?
        }
    };
    Ok(se_from_sinr(&sinr, cfg.uplink_samples(), cfg.coherence_samples))
}

/// Sum SE of every strategy for every trial of one sweep point.
#[derive(Debug, Clone)]
pub struct PointSamples {
    pub sweep: f64,
    /// `sum_se[t][s]` for trial `t` and strategy `s`; `Err` for failed trials.
    pub sum_se: Vec<Vec<std::result::Result<f64, String>>>,
}

impl PointSamples {
    /// Successful samples of strategy `s`, in trial order.
    pub fn column(&self, s: usize) -> Vec<f64> {
        self.sum_se.iter().filter_map(|row| row[s].as_ref().ok().copied()).collect()
    }
}

pub fn run_point(cfg: &NetworkConfig, strategies: &[Strategy], options: RunOptions) -> Result<PointSamples> {
    cfg.validate()?;
    let sum_se = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let channels = match draw_trial(cfg, t) {
                Ok(c) => c,
                Err(e) => return vec![Err(e.to_string()); strategies.len()],
            };
            strategies
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let mut rng = options.check_reconstruction.then(|| signal_rng(cfg.rng_seed, t, i));
                    evaluate_with(cfg, options.correlation, &channels, s, rng.as_mut())
                        .map(|r| r.sum_se)
                        .map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();
    Ok(PointSamples { sweep: f64::NAN, sum_se })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep: f64,
    pub strategy: Strategy,
    pub mean_sum_se: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn aggregate(samples: &PointSamples, strategies: &[Strategy], seed: u64) -> Result<Vec<ResultRow>> {
    let trials = samples.sum_se.len();
    strategies
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let errors: Vec<&String> = samples.sum_se.iter().filter_map(|r| r[i].as_ref().err()).collect();
            if errors.len() as f64 > MAX_FAILURE_FRACTION * trials as f64 {
                return Err(Error::FailureThreshold {
                    strategy: s.to_string(),
                    failed: errors.len(),
                    trials,
                    first: errors[0].clone(),
                });
            }
            let ok = samples.column(i);
            let (mean, stderr) = mean_and_stderr(&ok);
            Ok(ResultRow { sweep: samples.sweep, strategy: *s, mean_sum_se: mean, stderr, trials: ok.len(), seed })
        })
        .collect()
}

/// Runs every sweep point and strategy; rows are ordered by sweep point,
/// then by strategy order in the spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (value, cfg) in spec.sweep.points(&spec.base) {
        let mut samples = run_point(&cfg, &spec.strategies, spec.options)?;
        samples.sweep = value;
        rows.extend(aggregate(&samples, &spec.strategies, cfg.rng_seed)?);
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 8] =
    ["sweep", "path_mode", "allocation", "compression", "mean_sum_se", "stderr", "trials", "seed"];

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f64(r.sweep),
            r.strategy.path.as_str().to_string(),
            r.strategy.allocation.as_str().to_string(),
            r.strategy.compression.as_str().to_string(),
            fmt_f64(r.mean_sum_se),
            fmt_f64(r.stderr),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse(format!("missing column {i}")));
            Ok(ResultRow {
                sweep: num(field(0)?)?,
                strategy: Strategy::new(field(1)?.parse()?, field(2)?.parse()?, field(3)?.parse()?),
                mean_sum_se: num(field(4)?)?,
                stderr: num(field(5)?)?,
                trials: field(6)?.parse().map_err(|e| Error::Parse(format!("trials: {e}")))?,
                seed: field(7)?.parse().map_err(|e| Error::Parse(format!("seed: {e}")))?,
            })
        })
        .collect()
}
