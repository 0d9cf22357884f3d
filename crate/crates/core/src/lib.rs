//! DWT-based EEG compression with distortion modeling.
//!
//! The crate implements the full encoder chain (discrete wavelet transform,
//! threshold-based compression to a target ratio, uniform quantization,
//! bit-exact serialization), a binary-symmetric wireless channel, the PRD
//! distortion metric, and the statistics needed to regenerate the log-linear
//! distortion model: OLS regression with inference, nested-model ANOVA
//! selection, one-way ANOVA, and Tukey HSD over channel groups.

pub mod channel;
pub mod codec;
pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod rng;
pub mod signal_io;
pub mod stats;
pub mod wavelet;

pub use error::{Error, Result};
