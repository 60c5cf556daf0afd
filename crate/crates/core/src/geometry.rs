//! Network layout, large-scale fading and Rayleigh channel draws.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::linalg::{complex_normal, CMat};

/// Distances below this are clamped before evaluating the pathloss law.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// AP positions on a ring around the users' disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub ap_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
}

impl Layout {
    pub fn distance(&self, ap: usize, user: usize) -> f64 {
        self.ap_positions[ap].distance(&self.user_positions[user])
    }
}

/// Places `L` APs equally spaced on the ring and drops `K` users uniformly
/// (by area) in the inner disk.
pub fn place_network<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Layout {
    let ap_positions = (0..cfg.aps)
        .map(|l| {
            let theta = 2.0 * PI * l as f64 / cfg.aps as f64;
            Point { x: cfg.ap_ring_radius * theta.cos(), y: cfg.ap_ring_radius * theta.sin() }
        })
        .collect();
    let user_positions = (0..cfg.users)
        .map(|_| {
            let r = cfg.user_disk_radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            Point { x: r * theta.cos(), y: r * theta.sin() }
        })
        .collect();
    Layout { ap_positions, user_positions }
}

/// 3GPP urban-microcell pathloss in dB, with the distance clamped at 1 m.
pub fn pathloss_db(distance_m: f64) -> Result<f64> {
    let d = if distance_m.is_nan() { distance_m } else { distance_m.max(MIN_DISTANCE_M) };
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Config(format!("invalid distance {distance_m}")));
    }
    Ok(-30.5 - 36.7 * d.log10())
}

/// Spatial correlation model of each user-AP link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialCovariance {
    /// `R_kl = β_kl · I_N`.
    ScaledIdentity,
}

/// One drop of all AP channels.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `H_l` for every AP, each `N × K`.
    pub h: Vec<CMat>,
    /// Linear large-scale gains, `L × K`.
    pub beta: DMatrix<f64>,
    pub spatial: SpatialCovariance,
}

impl ChannelRealization {
    pub fn aps(&self) -> usize {
        self.h.len()
    }

    pub fn users(&self) -> usize {
        self.beta.ncols()
    }

    /// Channels of a subset of APs, in the given order.
    pub fn subset(&self, order: &[usize]) -> Vec<CMat> {
        order.iter().map(|&l| self.h[l].clone()).collect()
    }

    /// All APs stacked into the `M × K` centralized channel.
    pub fn stacked(&self) -> CMat {
        stack_rows(&self.h)
    }
}

pub fn stack_rows(blocks: &[CMat]) -> CMat {
    let k = blocks.first().map_or(0, |b| b.ncols());
    let m: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(m, k);
    let mut row = 0;
    for b in blocks {
        out.rows_mut(row, b.nrows()).copy_from(b);
        row += b.nrows();
    }
    out
}

/// Large-scale gains `β_kl` (linear) for a layout.
pub fn large_scale_gains(layout: &Layout) -> Result<DMatrix<f64>> {
    let (l, k) = (layout.ap_positions.len(), layout.user_positions.len());
    let mut beta = DMatrix::zeros(l, k);
    for ap in 0..l {
        for user in 0..k {
            beta[(ap, user)] = 10f64.powf(pathloss_db(layout.distance(ap, user))? / 10.0);
        }
    }
    Ok(beta)
}

/// Draws `H_l[:, k] ~ CN(0, β_kl I_N)` for every AP and user.
pub fn channels_from_gains<R: Rng + ?Sized>(beta: &DMatrix<f64>, antennas: usize, rng: &mut R) -> ChannelRealization {
    let h = (0..beta.nrows())
        .map(|l| CMat::from_fn(antennas, beta.ncols(), |_, k| complex_normal(rng, beta[(l, k)])))
        .collect();
    ChannelRealization { h, beta: beta.clone(), spatial: SpatialCovariance::ScaledIdentity }
}

pub fn draw_channels<R: Rng + ?Sized>(cfg: &NetworkConfig, layout: &Layout, rng: &mut R) -> Result<ChannelRealization> {
    if layout.ap_positions.len() != cfg.aps || layout.user_positions.len() != cfg.users {
        return Err(Error::Dimension("layout does not match the configuration".into()));
    }
    let beta = large_scale_gains(layout)?;
    Ok(channels_from_gains(&beta, cfg.antennas_per_ap, rng))
}
