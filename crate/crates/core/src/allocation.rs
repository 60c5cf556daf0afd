//! Division of the total fronthaul budget over the APs of a chain.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationScheme {
    /// Equal share per AP.
    Equal,
    /// Share grows linearly with chain position.
    Linear,
    /// Share grows with `log2` of chain position; the first AP gets nothing.
    Logarithmic,
}

impl AllocationScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Equal => "ef",
            Self::Linear => "lf",
            Self::Logarithmic => "log",
        }
    }

    pub fn schedule(&self, total: f64, len: usize) -> Result<RateSchedule> {
        match self {
            Self::Equal => equal(total, len),
            Self::Linear => linear(total, len),
            Self::Logarithmic => logarithmic(total, len),
        }
    }
}

impl fmt::Display for AllocationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AllocationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ef" | "equal" => Ok(Self::Equal),
            "lf" | "linear" => Ok(Self::Linear),
            "log" | "logarithmic" => Ok(Self::Logarithmic),
            other => Err(Error::Parse(format!("unknown allocation scheme '{other}'"))),
        }
    }
}

/// Bits per uplink sample for every chain position, in chain order.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSchedule {
    pub rates: Vec<f64>,
    pub scheme: AllocationScheme,
}

impl RateSchedule {
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

fn check(total: f64, len: usize, min_len: usize) -> Result<()> {
    if len < min_len {
        return Err(Error::Config(format!("chain of {len} APs, need at least {min_len}")));
    }
    if !(total >= 0.0) {
        return Err(Error::Config(format!("total rate {total} is negative")));
    }
    Ok(())
}

pub fn equal(total: f64, len: usize) -> Result<RateSchedule> {
    check(total, len, 1)?;
    Ok(RateSchedule { rates: vec![total / len as f64; len], scheme: AllocationScheme::Equal })
}

/// `R_l = 2 R_T l / (L (L + 1))`.
pub fn linear(total: f64, len: usize) -> Result<RateSchedule> {
    check(total, len, 1)?;
    let denom = (len * (len + 1)) as f64;
    let rates = (1..=len).map(|l| 2.0 * total * l as f64 / denom).collect();
    Ok(RateSchedule { rates, scheme: AllocationScheme::Linear })
}

/// `R_l = R_T log2(l) / Σ_i log2(i)`.
pub fn logarithmic(total: f64, len: usize) -> Result<RateSchedule> {
    check(total, len, 2)?;
    let norm: f64 = (1..=len).map(|i| (i as f64).log2()).sum();
    let rates = (1..=len).map(|l| total * (l as f64).log2() / norm).collect();
    Ok(RateSchedule { rates, scheme: AllocationScheme::Logarithmic })
}
