//! Distortion and compression metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base of the logarithm applied to PRD before regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    /// Base-10 logarithm (default).
    Ten,
    /// Natural logarithm.
    Natural,
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::Ten
    }
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Ten => x.log10(),
            LogBase::Natural => x.ln(),
        }
    }

    pub fn exp(self, x: f64) -> f64 {
        match self {
            LogBase::Ten => 10f64.powf(x),
            LogBase::Natural => x.exp(),
        }
    }
}

/// Sum of squares with Neumaier-compensated accumulation.
fn sum_sq<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let term = v * v;
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Percentage root-mean-square difference between a signal and its
/// reconstruction: `||x - xr|| / ||x|| * 100`.
pub fn prd(x: &[f64], xr: &[f64]) -> Result<f64> {
    if x.len() != xr.len() {
        return Err(Error::Invalid(format!(
            "prd: length mismatch ({} vs {})",
            x.len(),
            xr.len()
        )));
    }
    let energy = sum_sq(x.iter().copied());
    if energy <= 0.0 {
        return Err(Error::Invalid(
            "prd: original signal has zero energy".into(),
        ));
    }
    let err = sum_sq(x.iter().zip(xr).map(|(a, b)| a - b));
    Ok((err / energy).sqrt() * 100.0)
}

/// Compression ratio in percent for `m` retained coefficients out of `ns`:
/// `(1 - m/ns) * 100`.
pub fn compression_ratio(m: usize, ns: usize) -> Result<f64> {
    if m < 1 || m > ns {
        return Err(Error::Invalid(format!(
            "compression_ratio: m must be in 1..={}, got {}",
            ns, m
        )));
    }
    Ok((1.0 - m as f64 / ns as f64) * 100.0)
}

/// Log-transformed distortion `D = log(Ds)`.
pub fn log_distortion(ds: f64, base: LogBase) -> Result<f64> {
    if !(ds > 0.0) {
        return Err(Error::Invalid(format!(
            "log_distortion: PRD must be positive, got {}",
            ds
        )));
    }
    Ok(base.log(ds))
}
