//! `eegc`: encode and decode EEG blocks, run the distortion studies, and
//! fit or evaluate the log-linear distortion model.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 internal error. Diagnostics go to stderr.

mod plot;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use eegc_core::codec::{decode, decode_lenient, encode, EncodedBlock, BITSTREAM_VERSION};
use eegc_core::config::{load_config, ExperimentConfig};
use eegc_core::experiment::{
    fit_records, model_selection, predict_distortion, predict_paper, run_channel_study,
    run_sweep, FULL_MODEL_TERMS, REDUCED1_TERMS, REDUCED2_TERMS,
};
use eegc_core::metrics::{log_distortion, prd, LogBase};
use eegc_core::signal_io::{
    load_ascii_signal, read_records, synth_eeg, write_ascii_signal, write_records, Signal,
    DEFAULT_SAMPLING_RATE_HZ,
};
use eegc_core::stats::{two_sample_ztest, RegressionFit};
use eegc_core::wavelet::{WaveletSpec, DEFAULT_LEVELS};

fn version_string() -> String {
    format!(
        "{} (bitstream v{})",
        env!("CARGO_PKG_VERSION"),
        BITSTREAM_VERSION
    )
}

#[derive(Parser)]
#[command(
    name = "eegc",
    version = version_string(),
    about = "DWT-based EEG compression with distortion modeling and channel studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress an ASCII signal file into an encoded block.
    Encode(EncodeArgs),
    /// Reconstruct a signal from an encoded block.
    Decode(DecodeArgs),
    /// Percentage RMS difference between two signal files.
    Prd(PrdArgs),
    /// Run the distortion sweep and write experiment records.
    Sweep(SweepArgs),
    /// Fit one of the distortion models to experiment records.
    Fit(FitArgs),
    /// Backward model selection over the full distortion model.
    Select(SelectArgs),
    /// Channel-effect study: ANOVA and Tukey HSD over channel models.
    ChannelStudy(ChannelStudyArgs),
    /// Two-sample z-test from summary statistics.
    Ztest(ZtestArgs),
    /// Evaluate a reduced distortion model at (cr, filter length).
    Predict(PredictArgs),
    /// Render experiment records as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// One-sample-per-line ASCII signal file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Target compression ratio in percent, 0 <= cr < 100.
    #[arg(long)]
    cr: f64,
    /// Daubechies filter length (even, 2..=20).
    #[arg(long)]
    filter_length: usize,
    /// Decomposition depth.
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    levels: usize,
    /// Quantizer resolution in bits.
    #[arg(long, default_value_t = 12)]
    qbits: u8,
    /// Sampling rate of the input in Hz.
    #[arg(long, default_value_t = DEFAULT_SAMPLING_RATE_HZ)]
    rate: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    /// Encoded block file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output ASCII signal file.
    #[arg(long)]
    out: PathBuf,
    /// Reconstruct best-effort even if the block is internally inconsistent.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct PrdArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    reconstructed: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SAMPLING_RATE_HZ)]
    rate: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input signal; a synthetic EEG segment is generated when omitted.
    #[arg(long)]
    signal: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SAMPLING_RATE_HZ)]
    rate: f64,
    /// Output records CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    /// cr + filter_length + data_length + transmission_delay_ms
    Full,
    /// cr + filter_length + data_length
    Reduced1,
    /// cr + filter_length
    Reduced2,
}

impl ModelName {
    fn terms(self) -> &'static [&'static str] {
        match self {
            ModelName::Full => &FULL_MODEL_TERMS,
            ModelName::Reduced1 => &REDUCED1_TERMS,
            ModelName::Reduced2 => &REDUCED2_TERMS,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Records CSV produced by `sweep` or `channel-study`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    model: ModelName,
    /// Write the fit as JSON here (the summary table always prints).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    data: PathBuf,
    /// Keep a term while its p-value is at or below this threshold.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChannelStudyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    signal: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SAMPLING_RATE_HZ)]
    rate: f64,
    /// Directory for records.csv, anova.json, tukey.json, boxplot.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ZtestArgs {
    #[arg(long)]
    mean1: f64,
    #[arg(long)]
    sd1: f64,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    mean2: f64,
    #[arg(long)]
    sd2: f64,
    #[arg(long)]
    n2: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PredictModelSource {
    /// Fit JSON written by `fit --model reduced2`.
    #[arg(long)]
    fit: Option<PathBuf>,
    /// Use the published reference coefficients.
    #[arg(long)]
    paper: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    cr: f64,
    #[arg(long)]
    filter_length: f64,
    #[command(flatten)]
    source: PredictModelSource,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    /// Mean distortion heat map over the (cr, filter length) grid.
    Surface,
    /// Distortion vs cr, one line per filter length.
    Lines,
    /// Log-distortion box plot per channel.
    Box,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    kind: PlotKind,
    #[arg(long)]
    out: PathBuf,
}

/// Failures after successful argument parsing.
enum CmdError {
    /// Bad or inconsistent data; exit code 2.
    Data(String),
    /// Unexpected internal failure; exit code 3.
    Internal(String),
}

impl CmdError {
    fn exit_code(&self) -> u8 {
        match self {
            CmdError::Data(_) => 2,
            CmdError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Data(msg) | CmdError::Internal(msg) => f.write_str(msg),
        }
    }
}

impl From<eegc_core::Error> for CmdError {
    fn from(e: eegc_core::Error) -> Self {
        CmdError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CmdError {
    fn from(e: serde_json::Error) -> Self {
        CmdError::Internal(format!("JSON serialization failed: {}", e))
    }
}

type CmdResult = Result<(), CmdError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Prd(args) => cmd_prd(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Select(args) => cmd_select(args),
        Command::ChannelStudy(args) => cmd_channel_study(args),
        Command::Ztest(args) => cmd_ztest(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes)
        .map_err(|e| CmdError::Data(format!("{}: {}", path.display(), e)))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    write_bytes(path, text.as_bytes())
}

fn cmd_encode(args: EncodeArgs) -> CmdResult {
    let signal = load_ascii_signal(&args.input, args.rate)?;
    let spec = WaveletSpec::new(args.filter_length, args.levels)?;
    let block = encode(&signal, &spec, args.cr, args.qbits)?;
    write_bytes(&args.out, &block.serialize())?;
    println!(
        "encoded {} samples at cr={}% F={} J={} qbits={}: {} bytes (M={})",
        block.ns,
        block.target_cr,
        block.filter_length,
        block.levels,
        block.qbits,
        block.serialized_len(),
        block.significance_popcount()
    );
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> CmdResult {
    let bytes = fs::read(&args.input)
        .map_err(|e| CmdError::Data(format!("{}: {}", args.input.display(), e)))?;
    let block = EncodedBlock::deserialize(&bytes)?;
    let signal = if args.lenient {
        decode_lenient(&block)?
    } else {
        decode(&block)?
    };
    write_ascii_signal(&args.out, &signal)?;
    println!("decoded {} samples to {}", signal.len(), args.out.display());
    Ok(())
}

fn cmd_prd(args: PrdArgs) -> CmdResult {
    let original = load_ascii_signal(&args.original, args.rate)?;
    let reconstructed = load_ascii_signal(&args.reconstructed, args.rate)?;
    let ds = prd(&original.samples, &reconstructed.samples)?;
    println!("Ds = {}", ds);
    if ds > 0.0 {
        println!("D = {}", log_distortion(ds, LogBase::Ten)?);
    } else {
        println!("D = undefined (Ds = 0)");
    }
    Ok(())
}

fn load_or_default_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, CmdError> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Load the named signal, or synthesize one long enough for the experiment.
fn load_or_synth_signal(
    signal: &Option<PathBuf>,
    rate: f64,
    min_len: usize,
    seed: u64,
) -> Result<Signal, CmdError> {
    match signal {
        Some(p) => Ok(load_ascii_signal(p, rate)?),
        None => {
            let ns = (2 * min_len).max(4096);
            eprintln!(
                "note: no --signal given, using synthetic EEG (seed {}, {} samples)",
                seed, ns
            );
            Ok(synth_eeg(seed, ns, rate)?)
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let cfg = load_or_default_config(&args.config)?;
    let max_block = cfg.sweep.block_lengths.iter().copied().max().unwrap_or(4096);
    let signal =
        load_or_synth_signal(&args.signal, args.rate, max_block, cfg.sweep.master_seed)?;
    let records = run_sweep(&signal, &cfg.sweep)?;
    write_records(&records, &args.out)?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn cmd_fit(args: FitArgs) -> CmdResult {
    let records = read_records(&args.data)?;
    let fit = fit_records(&records, args.model.terms())?;
    if let Some(out) = &args.out {
        write_text(out, &serde_json::to_string_pretty(&fit)?)?;
        eprintln!("wrote fit to {}", out.display());
    }
    print!("{}", fit);
    Ok(())
}

fn cmd_select(args: SelectArgs) -> CmdResult {
    let records = read_records(&args.data)?;
    let report = model_selection(&records, args.alpha, &FULL_MODEL_TERMS)?;
    if let Some(out) = &args.out {
        write_text(out, &serde_json::to_string_pretty(&report)?)?;
        eprintln!("wrote selection report to {}", out.display());
    }
    println!(
        "model selection over {} records ({} excluded for zero distortion), alpha = {}",
        report.records_used, report.records_excluded, report.alpha_keep
    );
    for (i, fit) in report.fits.iter().enumerate() {
        if i == 0 {
            println!("\n== full model ==");
        } else {
            println!("\n== after dropping {:?} ==", report.dropped[i - 1]);
        }
        print!("{}", fit);
        if i < report.comparisons.len() {
            println!();
            print!("{}", report.comparisons[i]);
        }
    }
    println!(
        "\nchosen model: {}",
        report.chosen.term_names.join(" + ")
    );
    Ok(())
}

fn cmd_channel_study(args: ChannelStudyArgs) -> CmdResult {
    let cfg = load_or_default_config(&args.config)?;
    let signal = load_or_synth_signal(
        &args.signal,
        args.rate,
        cfg.study.block_length,
        cfg.study.master_seed,
    )?;
    let study = run_channel_study(&signal, &cfg.study)?;

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| CmdError::Data(format!("{}: {}", args.out_dir.display(), e)))?;
    let records_path = args.out_dir.join("records.csv");
    write_records(&study.records, &records_path)?;
    write_text(
        &args.out_dir.join("anova.json"),
        &serde_json::to_string_pretty(&study.anova)?,
    )?;
    write_text(
        &args.out_dir.join("tukey.json"),
        &serde_json::to_string_pretty(&study.tukey)?,
    )?;

    let mut boxplot_csv = String::from("channel,name,n,min,q1,median,q3,max,outliers\n");
    for b in &study.boxplots {
        let outliers: Vec<String> = b.outliers.iter().map(|v| v.to_string()).collect();
        boxplot_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            b.channel,
            b.name,
            b.n,
            b.min,
            b.q1,
            b.median,
            b.q3,
            b.max,
            outliers.join(";")
        ));
    }
    write_text(&args.out_dir.join("boxplot.csv"), &boxplot_csv)?;

    print!("{}", study.anova);
    println!();
    print!("{}", study.tukey);
    println!(
        "\nwrote records.csv, anova.json, tukey.json, boxplot.csv to {}",
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_ztest(args: ZtestArgs) -> CmdResult {
    let t = two_sample_ztest(args.mean1, args.sd1, args.n1, args.mean2, args.sd2, args.n2)?;
    println!("z = {}", t.z);
    println!("alpha = {:e}", t.alpha);
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> CmdResult {
    if !(0.0..100.0).contains(&args.cr) || !(0.0..=20.0).contains(&args.filter_length) {
        eprintln!(
            "warning: (cr={}, F={}) is outside the fitted range of the model",
            args.cr, args.filter_length
        );
    }
    let (d, ds) = if args.source.paper {
        predict_paper(args.cr, args.filter_length)
    } else {
        let path = args.source.fit.as_ref().expect("clap enforces the group");
        let text = fs::read_to_string(path)
            .map_err(|e| CmdError::Data(format!("{}: {}", path.display(), e)))?;
        let fit: RegressionFit = serde_json::from_str(&text)
            .map_err(|e| CmdError::Data(format!("{}: bad fit JSON: {}", path.display(), e)))?;
        predict_distortion(&fit, args.cr, args.filter_length)?
    };
    println!("D = {:.6}", d);
    println!("Ds = {:.6}", ds);
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> CmdResult {
    let records = read_records(&args.data)?;
    let svg = match args.kind {
        PlotKind::Surface => plot::surface(&records),
        PlotKind::Lines => plot::lines(&records),
        PlotKind::Box => plot::boxes(&records),
    }?;
    write_text(&args.out, &svg)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
