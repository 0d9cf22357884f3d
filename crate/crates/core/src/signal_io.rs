//! EEG signal ingestion, synthetic signal generation, and experiment-record
//! persistence.
//!
//! Real recordings are read from one-number-per-line ASCII files (the format
//! used by public single-channel epileptic EEG segments: 4096 integer
//! amplitudes at 173.61 Hz). A deterministic synthetic generator stands in
//! where no recording is available.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::ExperimentRecord;
use crate::rng::SplitMix64;

/// Sampling rate of the reference EEG segments, used when none is given.
pub const DEFAULT_SAMPLING_RATE_HZ: f64 = 173.61;

/// Exact header of the experiment records CSV.
pub const RECORDS_HEADER: &str =
    "cr,filter_length,data_length,transmission_delay_ms,channel,prd,log_prd";

/// A finite single-channel signal with its sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub sampling_rate: f64,
}

impl Signal {
    /// Build a signal, checking that it has at least two finite samples and
    /// a positive sampling rate.
    pub fn new(samples: Vec<f64>, sampling_rate: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Invalid(format!(
                "signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Invalid(format!(
                "signal sample {} is not finite",
                i
            )));
        }
        if !(sampling_rate > 0.0) {
            return Err(Error::Invalid(format!(
                "sampling rate must be positive, got {}",
                sampling_rate
            )));
        }
        Ok(Signal {
            samples,
            sampling_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Load a one-number-per-line ASCII signal file. Empty lines are skipped;
/// surrounding whitespace is tolerated.
pub fn load_ascii_signal(path: impl AsRef<Path>, sampling_rate: f64) -> Result<Signal> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = trimmed.parse().map_err(|_| {
            Error::parse(path, i + 1, format!("not a decimal number: {:?}", trimmed))
        })?;
        samples.push(value);
    }
    if samples.len() < 2 {
        return Err(Error::Invalid(format!(
            "{}: signal file has {} samples, need at least 2",
            path.display(),
            samples.len()
        )));
    }
    Signal::new(samples, sampling_rate)
}

/// Write a signal as one sample per line. Samples are printed in shortest
/// round-trip form, so `load_ascii_signal(write_ascii_signal(s))` reproduces
/// every sample exactly.
pub fn write_ascii_signal(path: impl AsRef<Path>, signal: &Signal) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(signal.len() * 8);
    for s in &signal.samples {
        writeln!(out, "{}", s).expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

// EEG-band components of the synthetic signal: (frequency Hz, relative
// amplitude). Delta, theta, alpha and beta representatives.
const SYNTH_BANDS: [(f64, f64); 4] = [(2.0, 1.0), (6.0, 0.75), (10.0, 0.6), (20.0, 0.4)];

// Fraction of total power carried by the pink-noise component.
const SYNTH_NOISE_POWER: f64 = 0.20;

/// Deterministic pseudo-EEG: band sinusoids with seeded random phases plus
/// 1/f-shaped noise, peak-normalized to ±100 µV. A pure function of its
/// arguments.
pub fn synth_eeg(seed: u64, ns: usize, sampling_rate: f64) -> Result<Signal> {
    if ns < 2 {
        return Err(Error::Invalid(format!(
            "synth_eeg: need at least 2 samples, got {}",
            ns
        )));
    }
    if !(sampling_rate > 0.0) {
        return Err(Error::Invalid(format!(
            "synth_eeg: sampling rate must be positive, got {}",
            sampling_rate
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let phases: Vec<f64> = SYNTH_BANDS
        .iter()
        .map(|_| rng.next_f64() * std::f64::consts::TAU)
        .collect();

    let mut tonal = vec![0.0; ns];
    for (i, out) in tonal.iter_mut().enumerate() {
        let t = i as f64 / sampling_rate;
        *out = SYNTH_BANDS
            .iter()
            .zip(&phases)
            .map(|(&(freq, amp), &phase)| amp * (std::f64::consts::TAU * freq * t + phase).sin())
            .sum();
    }

    let pink = pink_noise(&mut rng, ns);

    let tonal_power = mean_power(&tonal);
    let pink_power = mean_power(&pink);
    // Mix so the noise carries SYNTH_NOISE_POWER of the total power.
    let gain = if pink_power > 0.0 {
        (SYNTH_NOISE_POWER / (1.0 - SYNTH_NOISE_POWER) * tonal_power / pink_power).sqrt()
    } else {
        0.0
    };

    let mut samples: Vec<f64> = tonal
        .iter()
        .zip(&pink)
        .map(|(&s, &n)| s + gain * n)
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak > 0.0 {
        let scale = 100.0 / peak;
        for s in &mut samples {
            *s *= scale;
        }
    }
    Signal::new(samples, sampling_rate)
}

fn mean_power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Voss-McCartney pink noise: one of eight uniform rows is refreshed per
/// sample (picked by the trailing zeros of the sample counter) and the rows
/// plus a per-sample white term are summed. Eight rows shape the spectrum
/// as 1/f down to f_s/256, below the slowest EEG band of interest.
fn pink_noise(rng: &mut SplitMix64, ns: usize) -> Vec<f64> {
    const ROWS: usize = 8;
    let mut rows = [0.0f64; ROWS];
    for r in &mut rows {
        *r = rng.next_f64() * 2.0 - 1.0;
    }
    let mut out = Vec::with_capacity(ns);
    for counter in 1..=ns as u64 {
        let row = (counter.trailing_zeros() as usize).min(ROWS - 1);
        rows[row] = rng.next_f64() * 2.0 - 1.0;
        let white = rng.next_f64() * 2.0 - 1.0;
        out.push(rows.iter().sum::<f64>() + white);
    }
    out
}

/// Write experiment records as CSV with the exact schema of
/// [`RECORDS_HEADER`]. Floats are printed in shortest round-trip form, which
/// is lossless well beyond 17 significant digits.
pub fn write_records(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.cr, r.filter_length, r.data_length, r.transmission_delay_ms, r.channel, r.prd,
            r.log_prd
        )
        .expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read an experiment records CSV written by [`write_records`].
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == RECORDS_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                path,
                1,
                format!(
                    "unexpected header {:?}, expected {:?}",
                    header, RECORDS_HEADER
                ),
            ))
        }
        None => return Err(Error::parse(path, 1, "empty records file")),
    }

    let n_cols = RECORDS_HEADER.split(',').count();
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_cols {
            let missing: Vec<&str> = RECORDS_HEADER
                .split(',')
                .skip(fields.len())
                .collect();
            return Err(Error::parse(
                path,
                i + 1,
                if fields.len() < n_cols {
                    format!("missing column(s): {}", missing.join(", "))
                } else {
                    format!("expected {} columns, got {}", n_cols, fields.len())
                },
            ));
        }
        let field = |j: usize, name: &str| -> Result<f64> {
            fields[j]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(path, i + 1, format!("bad {}: {:?}", name, fields[j])))
        };
        let int_field = |j: usize, name: &str| -> Result<u32> {
            fields[j]
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::parse(path, i + 1, format!("bad {}: {:?}", name, fields[j])))
        };
        records.push(ExperimentRecord {
            cr: field(0, "cr")?,
            filter_length: int_field(1, "filter_length")?,
            data_length: int_field(2, "data_length")?,
            transmission_delay_ms: field(3, "transmission_delay_ms")?,
            channel: int_field(4, "channel")?,
            prd: field(5, "prd")?,
            log_prd: field(6, "log_prd")?,
        });
    }
    Ok(records)
}
