//! Monte-Carlo simulator for the uplink of a cell-free massive MIMO network
//! whose access points are chained on a capacity-limited sequential
//! fronthaul.
//!
//! The pieces, bottom up:
//!
//! * [`geometry`]: AP ring, user drops, pathloss and Rayleigh channels.
//! * [`chain`]: per-AP LMMSE refinement of the forwarded estimate.
//! * [`compression`]: fronthaul compression-noise designs (EIU, SCNM, WSINM).
//! * [`allocation`]: division of the total fronthaul budget over a chain.
//! * [`metrics`]: SINR and spectral efficiency of a chain's output.
//! * [`fusion`]: two-path processing with LMMSE fusion at the CPU.
//! * [`experiment`]: seeded sweeps, aggregation and CSV output.
//! * [`selftest`]: quick oracle checks run by the command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod chain;
pub mod compression;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fusion;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod selftest;

pub use allocation::{AllocationScheme, RateSchedule};
pub use chain::{run_chain, run_chain_observed, ChainParams, ChainState, CompressionStrategy, CorrelationModel};
pub use compression::{CompressionOutcome, InterferenceContext};
pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentSpec, PathMode, ResultRow, RunOptions, Strategy, SweepAxis};
pub use fusion::{FusedEstimate, PathSummary};
pub use geometry::{ChannelRealization, Layout};
pub use metrics::SeReport;
