//! Binary symmetric channel between the encoder host and the monitoring
//! server.
//!
//! The link is modeled as a memoryless bit-flipper over the encoded
//! bitstream: every significance-map and payload bit is inverted
//! independently with the channel's bit-error rate. The header is carried
//! out of band and never corrupted, so a received block always frames
//! correctly and the decoder can reconstruct (leniently) whatever survives.

use crate::codec::EncodedBlock;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Named link quality grades.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelQuality {
    Ideal,
    VeryGood,
    Good,
    Bad,
    VeryBad,
    Custom,
}

impl ChannelQuality {
    /// Default bit-error rate for the grade.
    pub fn default_ber(self) -> f64 {
        match self {
            ChannelQuality::Ideal => 0.0,
            ChannelQuality::VeryGood => 1e-5,
            ChannelQuality::Good => 1e-4,
            ChannelQuality::Bad => 1e-3,
            ChannelQuality::VeryBad => 5e-3,
            ChannelQuality::Custom => 0.0,
        }
    }
}

/// A channel instance: quality grade, bit-error rate, and corruption seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub quality: ChannelQuality,
    pub ber: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn new(quality: ChannelQuality, ber: f64, seed: u64) -> Result<Self> {
        if !(0.0..=0.5).contains(&ber) {
            return Err(Error::Invalid(format!(
                "bit-error rate must be in [0, 0.5], got {}",
                ber
            )));
        }
        if quality == ChannelQuality::Ideal && ber != 0.0 {
            return Err(Error::Invalid(format!(
                "ideal channel must have ber 0, got {}",
                ber
            )));
        }
        Ok(ChannelModel { quality, ber, seed })
    }

    /// Channel of the given grade at its default bit-error rate.
    pub fn from_quality(quality: ChannelQuality, seed: u64) -> Self {
        ChannelModel {
            quality,
            ber: quality.default_ber(),
            seed,
        }
    }

    pub fn ideal() -> Self {
        ChannelModel {
            quality: ChannelQuality::Ideal,
            ber: 0.0,
            seed: 0,
        }
    }
}

/// Pass a block through the channel. Each significance and payload bit is
/// flipped with probability `ber`; header fields are untouched. The result
/// is a pure function of `(block, channel)`.
pub fn transmit(block: &EncodedBlock, channel: &ChannelModel) -> EncodedBlock {
    if channel.ber == 0.0 {
        return block.clone();
    }
    let mut out = block.clone();
    let mut rng = SplitMix64::new(channel.seed);
    // Significance bits first (ns of them), then payload bits (M * qbits);
    // padding bits in either region are not part of the stream.
    flip_bits(&mut out.significance, block.ns as usize, channel.ber, &mut rng);
    flip_bits(&mut out.payload, block.payload_bit_len(), channel.ber, &mut rng);
    out
}

fn flip_bits(bytes: &mut [u8], n_bits: usize, ber: f64, rng: &mut SplitMix64) {
    debug_assert!(bytes.len() * 8 >= n_bits);
    for i in 0..n_bits {
        if rng.bernoulli(ber) {
            bytes[i / 8] ^= 1 << (i % 8);
        }
    }
}
