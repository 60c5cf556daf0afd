//! Fixtures shared by the benchmarks: one channel drop of the default
//! network and a chain state part-way along it.

use daisychain_core::compression::InterferenceContext;
use daisychain_core::experiment::draw_trial;
use daisychain_core::linalg::CMat;
use daisychain_core::metrics::interference_context;
use daisychain_core::{ChainParams, ChainState, CompressionStrategy, NetworkConfig};

pub fn network() -> NetworkConfig {
    NetworkConfig::default()
}

/// Channels of trial 0, one `N × K` block per AP in chain order.
pub fn channels(cfg: &NetworkConfig) -> Vec<CMat> {
    draw_trial(cfg, 0).expect("default network draws").h
}

pub fn params(cfg: &NetworkConfig) -> ChainParams {
    ChainParams::new(cfg.power, cfg.noise_variance)
}

/// Compression inputs seen by AP `ap` (1-based) under SCNM with an equal
/// rate split: the pre-compression correlation and the WSINM context.
pub fn compression_inputs(cfg: &NetworkConfig, ap: usize) -> (CMat, InterferenceContext, f64) {
    let hs = channels(cfg);
    let rate = cfg.total_rate / cfg.aps as f64;
    let mut st = ChainState::new(cfg.users, params(cfg));
    for h in &hs[..ap] {
        st.step(h, rate, CompressionStrategy::Scnm).expect("chain step");
    }
    let ctx = interference_context(&st.h, &st.v, &st.a, &st.q[..ap - 1], cfg.power, cfg.noise_variance)
        .expect("consistent chain");
    (st.p.clone(), ctx, rate)
}
