//! Network parameters and the flat key-value config file.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Every scalar parameter of one simulated network. Powers are linear watts.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Number of access points.
    pub aps: usize,
    /// Antennas per access point.
    pub antennas_per_ap: usize,
    /// Single-antenna users.
    pub users: usize,
    /// Per-user transmit power.
    pub power: f64,
    /// Receiver noise variance.
    pub noise_variance: f64,
    /// Samples per coherence block.
    pub coherence_samples: usize,
    /// Total fronthaul budget in bits per uplink sample.
    pub total_rate: f64,
    pub ap_ring_radius: f64,
    pub user_disk_radius: f64,
    pub rng_seed: u64,
    pub trials: usize,
}

impl Default for NetworkConfig {
    /// L = 12 APs with N = 10 antennas, K = 20 users, 20 dBm transmit power,
    /// −85 dBm noise, τ_c = 200, R_T = 500 bits per sample.
    fn default() -> Self {
        Self {
            aps: 12,
            antennas_per_ap: 10,
            users: 20,
            power: dbm_to_watts(20.0),
            noise_variance: dbm_to_watts(-85.0),
            coherence_samples: 200,
            total_rate: 500.0,
            ap_ring_radius: 300.0,
            user_disk_radius: 150.0,
            rng_seed: 1,
            trials: 200,
        }
    }
}

impl NetworkConfig {
    /// Total antennas `M = L·N`.
    pub fn total_antennas(&self) -> usize {
        self.aps * self.antennas_per_ap
    }

    /// Pilot samples, one per user.
    pub fn pilot_samples(&self) -> usize {
        self.users
    }

    pub fn uplink_samples(&self) -> usize {
        self.coherence_samples.saturating_sub(self.pilot_samples())
    }

    /// `τ_u / τ_c`.
    pub fn prelog(&self) -> f64 {
        self.uplink_samples() as f64 / self.coherence_samples as f64
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.aps == 0 || self.antennas_per_ap == 0 || self.users == 0 {
            return fail("AP, antenna and user counts must be positive");
        }
        if self.coherence_samples <= self.pilot_samples() {
            return fail("coherence block must be longer than the pilot phase (tau_c > K)");
        }
        for (name, v) in [
            ("power", self.power),
            ("noise variance", self.noise_variance),
            ("ap ring radius", self.ap_ring_radius),
            ("user disk radius", self.user_disk_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.total_rate >= 0.0) {
            return fail("total fronthaul rate must be non-negative");
        }
        if self.trials == 0 {
            return fail("trials must be positive");
        }
        Ok(())
    }

    /// Reads a config file. Unknown keys are rejected; missing keys keep the
    /// defaults.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let cfg = file.apply(Self::default());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// On-disk form. Powers are given in dBm and converted on load.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    aps: Option<usize>,
    antennas_per_ap: Option<usize>,
    /// Alternative to `antennas_per_ap`: total antennas, must divide by `aps`.
    total_antennas: Option<usize>,
    users: Option<usize>,
    power_dbm: Option<f64>,
    noise_dbm: Option<f64>,
    coherence_samples: Option<usize>,
    total_rate: Option<f64>,
    ap_ring_radius: Option<f64>,
    user_disk_radius: Option<f64>,
    seed: Option<u64>,
    trials: Option<usize>,
}

impl ConfigFile {
    fn apply(self, mut cfg: NetworkConfig) -> NetworkConfig {
        if let Some(v) = self.aps {
            cfg.aps = v;
        }
        if let Some(v) = self.antennas_per_ap {
            cfg.antennas_per_ap = v;
        }
        if let Some(m) = self.total_antennas {
            // a non-divisible total is caught by validate via the zero check
            cfg.antennas_per_ap = if cfg.aps > 0 && m % cfg.aps == 0 { m / cfg.aps } else { 0 };
        }
        if let Some(v) = self.users {
            cfg.users = v;
        }
        if let Some(v) = self.power_dbm {
            cfg.power = dbm_to_watts(v);
        }
        if let Some(v) = self.noise_dbm {
            cfg.noise_variance = dbm_to_watts(v);
        }
        if let Some(v) = self.coherence_samples {
            cfg.coherence_samples = v;
        }
        if let Some(v) = self.total_rate {
            cfg.total_rate = v;
        }
        if let Some(v) = self.ap_ring_radius {
            cfg.ap_ring_radius = v;
        }
        if let Some(v) = self.user_disk_radius {
            cfg.user_disk_radius = v;
        }
        if let Some(v) = self.seed {
            cfg.rng_seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        cfg
    }
}
