//! Experiment orchestration: the ideal-channel distortion sweep with
//! log-linear model selection, the channel-effect study with one-way ANOVA
//! and Tukey HSD, and prediction from a reduced distortion model.
//!
//! Everything here is deterministic given the master seed: each sweep cell
//! derives its own RNG stream from (master seed, grid indices, channel,
//! trial), so cells can run in parallel in any order and still merge into a
//! canonical, bit-reproducible record list.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{transmit, ChannelModel, ChannelQuality};
use crate::codec::{decode, decode_lenient, encode};
use crate::error::{Error, Result};
use crate::metrics::LogBase;
use crate::rng::mix_seed;
use crate::signal_io::Signal;
use crate::stats::{
    nested_anova, one_way_anova, ols_fit, tukey_hsd, NestedAnova, OneWayAnova, RegressionFit,
    TukeyResult, PAPER_MODEL,
};
use crate::wavelet::WaveletSpec;

/// One observation row of the distortion studies.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    /// Target compression ratio in percent.
    pub cr: f64,
    /// Wavelet filter length F.
    pub filter_length: u32,
    /// Block length L in samples.
    pub data_length: u32,
    /// Transmission delay T in milliseconds at the nominal link rate.
    pub transmission_delay_ms: f64,
    /// Channel id: 0 = ideal, 1..4 = graded channel models.
    pub channel: u32,
    /// Encoding distortion Ds in percent.
    pub prd: f64,
    /// D = log10(Ds); NaN when Ds is zero.
    pub log_prd: f64,
}

/// A channel as configured for an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDef {
    pub id: u32,
    pub name: String,
    pub ber: f64,
}

impl ChannelDef {
    pub fn ideal() -> Self {
        ChannelDef {
            id: 0,
            name: "ideal".into(),
            ber: 0.0,
        }
    }

    /// The four graded channel models at their default bit-error rates.
    pub fn graded_defaults() -> Vec<ChannelDef> {
        vec![
            ChannelDef {
                id: 1,
                name: "very_good".into(),
                ber: ChannelQuality::VeryGood.default_ber(),
            },
            ChannelDef {
                id: 2,
                name: "good".into(),
                ber: ChannelQuality::Good.default_ber(),
            },
            ChannelDef {
                id: 3,
                name: "bad".into(),
                ber: ChannelQuality::Bad.default_ber(),
            },
            ChannelDef {
                id: 4,
                name: "very_bad".into(),
                ber: ChannelQuality::VeryBad.default_ber(),
            },
        ]
    }

    fn quality(&self) -> ChannelQuality {
        match self.id {
            0 => ChannelQuality::Ideal,
            1 => ChannelQuality::VeryGood,
            2 => ChannelQuality::Good,
            3 => ChannelQuality::Bad,
            4 => ChannelQuality::VeryBad,
            _ => ChannelQuality::Custom,
        }
    }

    fn model(&self, seed: u64) -> Result<ChannelModel> {
        let quality = if self.ber == self.quality().default_ber() {
            self.quality()
        } else {
            ChannelQuality::Custom
        };
        ChannelModel::new(quality, self.ber, seed)
    }
}

/// Grid and seeding parameters of the distortion sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub cr_grid: Vec<f64>,
    pub filter_lengths: Vec<usize>,
    pub block_lengths: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub qbits: u8,
    pub levels: usize,
    /// Nominal link rate used to derive the transmission delay.
    pub link_rate_bps: f64,
    pub channels: Vec<ChannelDef>,
}

impl Default for SweepConfig {
    /// 10 ratios x 10 filter lengths x 3 block lengths over an ideal
    /// channel: 300 observations, comparable to the published study.
    fn default() -> Self {
        SweepConfig {
            cr_grid: (0..10).map(|i| 41.0 + 6.0 * i as f64).collect(),
            filter_lengths: (1..=10).map(|k| 2 * k).collect(),
            block_lengths: vec![1024, 2048, 4096],
            trials: 1,
            master_seed: 1,
            qbits: 12,
            levels: 5,
            link_rate_bps: 250_000.0,
            channels: vec![ChannelDef::ideal()],
        }
    }
}

/// Parameters of the channel-effect study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub cr: f64,
    pub filter_length: usize,
    pub block_length: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub qbits: u8,
    pub levels: usize,
    pub link_rate_bps: f64,
    pub channels: Vec<ChannelDef>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            cr: 60.0,
            filter_length: 8,
            block_length: 4096,
            trials: 300,
            master_seed: 1,
            qbits: 12,
            levels: 5,
            link_rate_bps: 250_000.0,
            channels: ChannelDef::graded_defaults(),
        }
    }
}

/// Regressors of the full distortion model, in canonical order.
pub const FULL_MODEL_TERMS: [&str; 4] = [
    "cr",
    "filter_length",
    "data_length",
    "transmission_delay_ms",
];

/// Full model without the transmission delay.
pub const REDUCED1_TERMS: [&str; 3] = ["cr", "filter_length", "data_length"];

/// The accepted reduced model: compression ratio and filter length only.
pub const REDUCED2_TERMS: [&str; 2] = ["cr", "filter_length"];

fn validate_channels(channels: &[ChannelDef]) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::Invalid("no channels configured".into()));
    }
    for ch in channels {
        if !(0.0..=0.5).contains(&ch.ber) {
            return Err(Error::Invalid(format!(
                "channel {:?}: ber {} out of [0, 0.5]",
                ch.name, ch.ber
            )));
        }
        if ch.id == 0 && ch.ber != 0.0 {
            return Err(Error::Invalid(format!(
                "channel {:?} has id 0 (ideal) but ber {}",
                ch.name, ch.ber
            )));
        }
    }
    Ok(())
}

fn validate_sweep(signal: &Signal, cfg: &SweepConfig) -> Result<()> {
    if cfg.cr_grid.is_empty() || cfg.filter_lengths.is_empty() || cfg.block_lengths.is_empty() {
        return Err(Error::Invalid("sweep grids must be non-empty".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    if !(cfg.link_rate_bps > 0.0) {
        return Err(Error::Invalid(format!(
            "link rate must be positive, got {}",
            cfg.link_rate_bps
        )));
    }
    for &cr in &cfg.cr_grid {
        if !(0.0..100.0).contains(&cr) {
            return Err(Error::Invalid(format!("cr {} out of [0, 100)", cr)));
        }
    }
    for &f in &cfg.filter_lengths {
        WaveletSpec::new(f, cfg.levels)?;
    }
    let spec = WaveletSpec::new(cfg.filter_lengths[0], cfg.levels)?;
    for &l in &cfg.block_lengths {
        spec.validate_length(l)?;
        if l > signal.len() {
            return Err(Error::Invalid(format!(
                "block length {} exceeds signal length {}",
                l,
                signal.len()
            )));
        }
    }
    validate_channels(&cfg.channels)
}

/// Start of the consecutive block encoded by one cell. Each (cr, F, L,
/// trial) cell draws its own offset so block content varies like noise
/// across the grid instead of tracking any one design column.
fn block_offset(master_seed: u64, cell: Cell, block_length: usize, ns: usize) -> usize {
    if ns <= block_length {
        return 0;
    }
    let span = (ns - block_length + 1) as u64;
    let mixed = mix_seed(
        master_seed,
        &[
            0xB10C,
            cell.cr_i as u64,
            cell.f_i as u64,
            cell.l_i as u64,
            cell.trial as u64,
        ],
    );
    (mixed % span) as usize
}

#[derive(Clone, Copy)]
struct Cell {
    cr_i: usize,
    f_i: usize,
    l_i: usize,
    ch_i: usize,
    trial: usize,
}

fn run_cell(signal: &Signal, cfg: &SweepConfig, cell: Cell) -> Result<ExperimentRecord> {
    let cr = cfg.cr_grid[cell.cr_i];
    let filter_length = cfg.filter_lengths[cell.f_i];
    let block_length = cfg.block_lengths[cell.l_i];
    let ch = &cfg.channels[cell.ch_i];

    let offset = block_offset(cfg.master_seed, cell, block_length, signal.len());
    let block = Signal::new(
        signal.samples[offset..offset + block_length].to_vec(),
        signal.sampling_rate,
    )?;
    let spec = WaveletSpec::new(filter_length, cfg.levels)?;
    let encoded = encode(&block, &spec, cr, cfg.qbits)?;
    let transmission_delay_ms =
        encoded.serialized_len() as f64 * 8.0 / cfg.link_rate_bps * 1000.0;

    let decoded = if ch.ber > 0.0 {
        let seed = mix_seed(
            cfg.master_seed,
            &[
                cell.cr_i as u64,
                cell.f_i as u64,
                cell.l_i as u64,
                ch.id as u64,
                cell.trial as u64,
            ],
        );
        decode_lenient(&transmit(&encoded, &ch.model(seed)?))?
    } else {
        decode(&encoded)?
    };

    let ds = crate::metrics::prd(&block.samples, &decoded.samples)?;
    let log_prd = if ds > 0.0 {
        LogBase::Ten.log(ds)
    } else {
        f64::NAN
    };
    Ok(ExperimentRecord {
        cr,
        filter_length: filter_length as u32,
        data_length: block_length as u32,
        transmission_delay_ms,
        channel: ch.id,
        prd: ds,
        log_prd,
    })
}

/// Run the sweep over every (cr, F, L, channel, trial) cell. Cells execute
/// in parallel; records come back in canonical grid order regardless of
/// scheduling.
pub fn run_sweep(signal: &Signal, cfg: &SweepConfig) -> Result<Vec<ExperimentRecord>> {
    validate_sweep(signal, cfg)?;
    let mut cells = Vec::new();
    for cr_i in 0..cfg.cr_grid.len() {
        for f_i in 0..cfg.filter_lengths.len() {
            for l_i in 0..cfg.block_lengths.len() {
                for ch_i in 0..cfg.channels.len() {
                    for trial in 0..cfg.trials {
                        cells.push(Cell {
                            cr_i,
                            f_i,
                            l_i,
                            ch_i,
                            trial,
                        });
                    }
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|cell| run_cell(signal, cfg, cell))
        .collect()
}

fn regressor_column(records: &[&ExperimentRecord], term: &str) -> Result<Vec<f64>> {
    let col = match term {
        "cr" => records.iter().map(|r| r.cr).collect(),
        "filter_length" => records.iter().map(|r| r.filter_length as f64).collect(),
        "data_length" => records.iter().map(|r| r.data_length as f64).collect(),
        "transmission_delay_ms" => records
            .iter()
            .map(|r| r.transmission_delay_ms)
            .collect(),
        other => {
            return Err(Error::Invalid(format!(
                "unknown regressor {:?} (expected one of {:?})",
                other, FULL_MODEL_TERMS
            )))
        }
    };
    Ok(col)
}

/// Fit `D = log10(Ds)` on the given regressors, excluding records with zero
/// distortion (their log is undefined). Returns the fit and the number of
/// excluded records.
pub fn fit_records_counted(
    records: &[ExperimentRecord],
    terms: &[&str],
) -> Result<(RegressionFit, usize)> {
    let usable: Vec<&ExperimentRecord> = records.iter().filter(|r| r.prd > 0.0).collect();
    let excluded = records.len() - usable.len();
    let response: Vec<f64> = usable.iter().map(|r| LogBase::Ten.log(r.prd)).collect();
    let mut columns = Vec::with_capacity(terms.len());
    for term in terms {
        columns.push(regressor_column(&usable, term)?);
    }
    let mut fit = ols_fit(terms, &columns, &response)?;
    fit.log_base = LogBase::Ten;
    Ok((fit, excluded))
}

/// Fit a distortion model on experiment records.
pub fn fit_records(records: &[ExperimentRecord], terms: &[&str]) -> Result<RegressionFit> {
    fit_records_counted(records, terms).map(|(fit, _)| fit)
}

/// Backward-elimination report: the chain of fits, the dropped terms, and
/// the F-test of each step against the model before it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub alpha_keep: f64,
    pub records_used: usize,
    pub records_excluded: usize,
    pub fits: Vec<RegressionFit>,
    pub dropped: Vec<String>,
    pub comparisons: Vec<NestedAnova>,
    pub chosen: RegressionFit,
}

/// Backward elimination starting from `terms`: repeatedly drop the term
/// with the largest p-value above `alpha_keep`, refit, and compare each
/// reduction against the previous model with a nested-model F-test.
pub fn model_selection(
    records: &[ExperimentRecord],
    alpha_keep: f64,
    terms: &[&str],
) -> Result<SelectionReport> {
    if terms.is_empty() {
        return Err(Error::Invalid("model selection needs at least one regressor".into()));
    }
    if !(0.0 < alpha_keep && alpha_keep < 1.0) {
        return Err(Error::Invalid(format!(
            "alpha must be in (0, 1), got {}",
            alpha_keep
        )));
    }
    let mut active: Vec<&str> = terms.to_vec();
    let (first_fit, excluded) = fit_records_counted(records, &active)?;
    let records_used = records.len() - excluded;
    let mut fits = vec![first_fit];
    let mut dropped = Vec::new();
    let mut comparisons = Vec::new();

    loop {
        let current = fits.last().unwrap();
        let worst = current
            .term_names
            .iter()
            .zip(&current.p_value)
            .skip(1) // intercept always stays
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(name, &p)| (name.clone(), p));
        let (name, p) = match worst {
            Some(w) => w,
            None => break, // intercept-only model
        };
        if p <= alpha_keep {
            break;
        }
        active.retain(|t| *t != name);
        let reduced = fit_records(records, &active)?;
        comparisons.push(nested_anova(current, &reduced)?);
        dropped.push(name);
        fits.push(reduced);
    }

    let chosen = fits.last().unwrap().clone();
    Ok(SelectionReport {
        alpha_keep,
        records_used,
        records_excluded: excluded,
        fits,
        dropped,
        comparisons,
        chosen,
    })
}

/// Five-number box-plot summary with 1.5*IQR outlier fences. `min` and
/// `max` are the whisker ends (the most extreme values inside the fences);
/// values beyond them are listed as outliers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxPlotSummary {
    pub channel: u32,
    pub name: String,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data (R type 7).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Box-plot summary of one group of values.
pub fn box_summary(channel: u32, name: &str, values: &[f64]) -> Result<BoxPlotSummary> {
    if values.is_empty() {
        return Err(Error::Invalid(format!("group {:?} is empty", name)));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let whisker_low = sorted
        .iter()
        .copied()
        .find(|&v| v >= lo_fence)
        .unwrap_or(sorted[0]);
    let whisker_high = sorted
        .iter()
        .rev()
        .copied()
        .find(|&v| v <= hi_fence)
        .unwrap_or(sorted[sorted.len() - 1]);
    let outliers: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_fence || v > hi_fence)
        .collect();
    Ok(BoxPlotSummary {
        channel,
        name: name.to_string(),
        n: sorted.len(),
        min: whisker_low,
        q1,
        median,
        q3,
        max: whisker_high,
        outliers,
    })
}

/// Output of the channel-effect study.
#[derive(Debug, Clone)]
pub struct ChannelStudy {
    pub records: Vec<ExperimentRecord>,
    pub anova: OneWayAnova,
    pub tukey: TukeyResult,
    pub boxplots: Vec<BoxPlotSummary>,
}

/// Fixed (cr, F) encoding transmitted over each configured channel for many
/// independently seeded trials; log-distortion groups are compared with
/// one-way ANOVA and Tukey HSD at 95% family confidence.
pub fn run_channel_study(signal: &Signal, cfg: &StudyConfig) -> Result<ChannelStudy> {
    if cfg.channels.len() < 2 {
        return Err(Error::Invalid(format!(
            "channel study needs at least 2 channels, got {}",
            cfg.channels.len()
        )));
    }
    if cfg.trials < 2 {
        return Err(Error::Invalid(format!(
            "channel study needs at least 2 trials per channel, got {}",
            cfg.trials
        )));
    }
    validate_channels(&cfg.channels)?;
    if cfg.block_length > signal.len() {
        return Err(Error::Invalid(format!(
            "block length {} exceeds signal length {}",
            cfg.block_length,
            signal.len()
        )));
    }
    let spec = WaveletSpec::new(cfg.filter_length, cfg.levels)?;
    spec.validate_length(cfg.block_length)?;

    let block = Signal::new(
        signal.samples[..cfg.block_length].to_vec(),
        signal.sampling_rate,
    )?;
    // One encode; only the channel corruption differs between trials.
    let encoded = encode(&block, &spec, cfg.cr, cfg.qbits)?;
    let transmission_delay_ms =
        encoded.serialized_len() as f64 * 8.0 / cfg.link_rate_bps * 1000.0;

    let mut tasks = Vec::with_capacity(cfg.channels.len() * cfg.trials);
    for (ch_i, ch) in cfg.channels.iter().enumerate() {
        for trial in 0..cfg.trials {
            tasks.push((ch_i, ch.clone(), trial));
        }
    }
    let records: Result<Vec<ExperimentRecord>> = tasks
        .into_par_iter()
        .map(|(_, ch, trial)| {
            let decoded = if ch.ber > 0.0 {
                let seed = mix_seed(
                    cfg.master_seed,
                    &[0, 0, 0, ch.id as u64, trial as u64],
                );
                decode_lenient(&transmit(&encoded, &ch.model(seed)?))?
            } else {
                decode(&encoded)?
            };
            let ds = crate::metrics::prd(&block.samples, &decoded.samples)?;
            let log_prd = if ds > 0.0 {
                LogBase::Ten.log(ds)
            } else {
                f64::NAN
            };
            Ok(ExperimentRecord {
                cr: cfg.cr,
                filter_length: cfg.filter_length as u32,
                data_length: cfg.block_length as u32,
                transmission_delay_ms,
                channel: ch.id,
                prd: ds,
                log_prd,
            })
        })
        .collect();
    let records = records?;

    let mut groups: Vec<(String, Vec<f64>)> = Vec::with_capacity(cfg.channels.len());
    for ch in &cfg.channels {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| r.channel == ch.id && r.log_prd.is_finite())
            .map(|r| r.log_prd)
            .collect();
        if values.len() < 2 {
            return Err(Error::Degenerate(format!(
                "channel {:?} has fewer than 2 finite log-distortion values",
                ch.name
            )));
        }
        groups.push((ch.name.clone(), values));
    }

    let anova = one_way_anova(&groups)?;
    let tukey = tukey_hsd(&groups, 0.95)?;
    let boxplots: Result<Vec<BoxPlotSummary>> = cfg
        .channels
        .iter()
        .zip(&groups)
        .map(|(ch, (name, values))| box_summary(ch.id, name, values))
        .collect();

    Ok(ChannelStudy {
        records,
        anova,
        tukey,
        boxplots: boxplots?,
    })
}

/// Evaluate the published reduced model at (cr, F): returns the log-scale
/// distortion D and the back-transformed PRD in percent.
pub fn predict_paper(cr: f64, filter_length: f64) -> (f64, f64) {
    let d = PAPER_MODEL.beta0 + PAPER_MODEL.beta1 * cr + PAPER_MODEL.beta2 * filter_length;
    (d, LogBase::Ten.exp(d))
}

/// Evaluate a fitted reduced model (terms must be exactly intercept, cr and
/// filter_length) at (cr, F).
pub fn predict_distortion(
    fit: &RegressionFit,
    cr: f64,
    filter_length: f64,
) -> Result<(f64, f64)> {
    let expected = ["(Intercept)", "cr", "filter_length"];
    if fit.term_names.len() != 3
        || !expected.iter().all(|t| fit.term_names.iter().any(|n| n == t))
    {
        return Err(Error::Invalid(format!(
            "prediction needs a model with exactly terms {:?}, got {:?}",
            expected, fit.term_names
        )));
    }
    let coefficient = |name: &str| fit.term_beta(name).unwrap();
    let d = coefficient("(Intercept)")
        + coefficient("cr") * cr
        + coefficient("filter_length") * filter_length;
    Ok((d, fit.log_base.exp(d)))
}
