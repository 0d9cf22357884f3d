//! Plain-text configuration for the sweep and the channel study.
//!
//! The format is sectioned key-value text:
//!
//! ```text
//! [sweep]
//! cr_grid = 30, 35, 40, 45, 50, 55, 60, 65, 70, 75
//! filter_lengths = 2, 4, 6, 8, 10, 12, 14, 16, 18, 20
//! block_lengths = 1024, 2048, 4096
//! trials = 1
//! master_seed = 1
//! qbits = 12
//! levels = 5
//! link_rate_bps = 250000
//! channels = ideal
//!
//! [study]
//! cr = 60
//! filter_length = 8
//! block_length = 4096
//! trials = 300
//! channels = very_good, good, bad, very_bad
//!
//! [channel.good]
//! ber = 1e-4
//! ```
//!
//! Channels `ideal` (id 0) and `very_good`, `good`, `bad`, `very_bad`
//! (ids 1..4) exist with default bit-error rates; a `[channel.<name>]`
//! section overrides a known channel's `ber` or appends a new named channel
//! (next free id). Every key is optional and defaults to the values above.
//! `#` and `;` start comments.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{ChannelDef, StudyConfig, SweepConfig};

/// Parsed experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sweep: SweepConfig,
    pub study: StudyConfig,
    /// Every channel known to this configuration.
    pub channels: Vec<ChannelDef>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut channels = vec![ChannelDef::ideal()];
        channels.extend(ChannelDef::graded_defaults());
        ExperimentConfig {
            sweep: SweepConfig::default(),
            study: StudyConfig::default(),
            channels,
        }
    }
}

/// Load a configuration file, falling back to defaults for missing keys.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

struct Entry {
    line: usize,
    value: String,
}

/// Parse configuration text. `path` is used only for error messages.
pub fn parse_config(text: &str, path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    // section -> key -> (line, value)
    let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
    let mut section_order: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find(['#', ';']) {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            if !section_order.contains(&current) {
                section_order.push(current.clone());
            }
            sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::parse(path, line_no, format!("expected `key = value`, got {:?}", line))
        })?;
        if current.is_empty() {
            return Err(Error::parse(
                path,
                line_no,
                "key outside of any [section]",
            ));
        }
        sections.entry(current.clone()).or_default().insert(
            key.trim().to_string(),
            Entry {
                line: line_no,
                value: value.trim().to_string(),
            },
        );
    }

    let mut cfg = ExperimentConfig::default();

    // Channel sections first so [sweep]/[study] channel lists can refer to them.
    for name in &section_order {
        let Some(channel_name) = name.strip_prefix("channel.") else {
            continue;
        };
        let entries = &sections[name];
        for (key, entry) in entries {
            if key != "ber" {
                return Err(Error::parse(
                    path,
                    entry.line,
                    format!("unknown channel key {:?} (only `ber`)", key),
                ));
            }
        }
        let ber = match entries.get("ber") {
            Some(entry) => parse_f64(path, entry)?,
            None => {
                return Err(Error::Invalid(format!(
                    "channel section [{}] needs a `ber` key",
                    name
                )))
            }
        };
        match cfg.channels.iter_mut().find(|c| c.name == channel_name) {
            Some(ch) => ch.ber = ber,
            None => {
                let id = cfg.channels.iter().map(|c| c.id).max().unwrap_or(0) + 1;
                cfg.channels.push(ChannelDef {
                    id,
                    name: channel_name.to_string(),
                    ber,
                });
            }
        }
    }

    for name in &section_order {
        let entries = &sections[name];
        match name.as_str() {
            "sweep" => apply_sweep(path, entries, &mut cfg)?,
            "study" => apply_study(path, entries, &mut cfg)?,
            other if other.starts_with("channel.") => {}
            other => {
                return Err(Error::Invalid(format!(
                    "{}: unknown section [{}]",
                    path.display(),
                    other
                )))
            }
        }
    }

    // Propagate shared keys into the study unless [study] overrode them.
    let study_keys = sections.get("study");
    let has = |k: &str| study_keys.map_or(false, |m| m.contains_key(k));
    if !has("master_seed") {
        cfg.study.master_seed = cfg.sweep.master_seed;
    }
    if !has("qbits") {
        cfg.study.qbits = cfg.sweep.qbits;
    }
    if !has("levels") {
        cfg.study.levels = cfg.sweep.levels;
    }
    if !has("link_rate_bps") {
        cfg.study.link_rate_bps = cfg.sweep.link_rate_bps;
    }

    // Refresh channel lists against the (possibly re-BERed) registry.
    cfg.sweep.channels = resolve_names(
        path,
        &cfg.channels,
        &cfg.sweep.channels.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
    )?;
    cfg.study.channels = resolve_names(
        path,
        &cfg.channels,
        &cfg.study.channels.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
    )?;
    Ok(cfg)
}

fn apply_sweep(
    path: &Path,
    entries: &BTreeMap<String, Entry>,
    cfg: &mut ExperimentConfig,
) -> Result<()> {
    for (key, entry) in entries {
        match key.as_str() {
            "cr_grid" => cfg.sweep.cr_grid = parse_f64_list(path, entry)?,
            "filter_lengths" => cfg.sweep.filter_lengths = parse_usize_list(path, entry)?,
            "block_lengths" => cfg.sweep.block_lengths = parse_usize_list(path, entry)?,
            "trials" => cfg.sweep.trials = parse_usize(path, entry)?,
            "master_seed" => cfg.sweep.master_seed = parse_u64(path, entry)?,
            "qbits" => cfg.sweep.qbits = parse_usize(path, entry)? as u8,
            "levels" => cfg.sweep.levels = parse_usize(path, entry)?,
            "link_rate_bps" => cfg.sweep.link_rate_bps = parse_f64(path, entry)?,
            "channels" => {
                let names = parse_name_list(&entry.value);
                cfg.sweep.channels = resolve_names(path, &cfg.channels, &names)?;
            }
            other => {
                return Err(Error::parse(
                    path,
                    entry.line,
                    format!("unknown [sweep] key {:?}", other),
                ))
            }
        }
    }
    Ok(())
}

fn apply_study(
    path: &Path,
    entries: &BTreeMap<String, Entry>,
    cfg: &mut ExperimentConfig,
) -> Result<()> {
    for (key, entry) in entries {
        match key.as_str() {
            "cr" => cfg.study.cr = parse_f64(path, entry)?,
            "filter_length" => cfg.study.filter_length = parse_usize(path, entry)?,
            "block_length" => cfg.study.block_length = parse_usize(path, entry)?,
            "trials" => cfg.study.trials = parse_usize(path, entry)?,
            "master_seed" => cfg.study.master_seed = parse_u64(path, entry)?,
            "qbits" => cfg.study.qbits = parse_usize(path, entry)? as u8,
            "levels" => cfg.study.levels = parse_usize(path, entry)?,
            "link_rate_bps" => cfg.study.link_rate_bps = parse_f64(path, entry)?,
            "channels" => {
                let names = parse_name_list(&entry.value);
                cfg.study.channels = resolve_names(path, &cfg.channels, &names)?;
            }
            other => {
                return Err(Error::parse(
                    path,
                    entry.line,
                    format!("unknown [study] key {:?}", other),
                ))
            }
        }
    }
    Ok(())
}

fn parse_name_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn resolve_names(path: &Path, registry: &[ChannelDef], names: &[String]) -> Result<Vec<ChannelDef>> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        match registry.iter().find(|c| &c.name == name) {
            Some(ch) => out.push(ch.clone()),
            None => {
                return Err(Error::Invalid(format!(
                    "{}: unknown channel {:?} (define it with [channel.{}])",
                    path.display(),
                    name,
                    name
                )))
            }
        }
    }
    Ok(out)
}

fn parse_f64(path: &Path, entry: &Entry) -> Result<f64> {
    entry
        .value
        .parse()
        .map_err(|_| Error::parse(path, entry.line, format!("bad number {:?}", entry.value)))
}

fn parse_u64(path: &Path, entry: &Entry) -> Result<u64> {
    entry
        .value
        .parse()
        .map_err(|_| Error::parse(path, entry.line, format!("bad integer {:?}", entry.value)))
}

fn parse_usize(path: &Path, entry: &Entry) -> Result<usize> {
    entry
        .value
        .parse()
        .map_err(|_| Error::parse(path, entry.line, format!("bad integer {:?}", entry.value)))
}

fn parse_f64_list(path: &Path, entry: &Entry) -> Result<Vec<f64>> {
    entry
        .value
        .split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                Error::parse(path, entry.line, format!("bad number {:?}", s.trim()))
            })
        })
        .collect()
}

fn parse_usize_list(path: &Path, entry: &Entry) -> Result<Vec<usize>> {
    entry
        .value
        .split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                Error::parse(path, entry.line, format!("bad integer {:?}", s.trim()))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("", "test.cfg").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.sweep.cr_grid.len(), 10);
        assert_eq!(cfg.study.trials, 300);
        assert_eq!(cfg.channels.len(), 5);
    }

    #[test]
    fn parses_sections_and_lists() {
        let text = "\
# distortion sweep
[sweep]
cr_grid = 40, 50, 60
filter_lengths = 2, 4
block_lengths = 512
trials = 2
master_seed = 42
qbits = 10
levels = 4
link_rate_bps = 125000

[study]
cr = 55
trials = 80

[channel.good]
ber = 2e-4
";
        let cfg = parse_config(text, "test.cfg").unwrap();
        assert_eq!(cfg.sweep.cr_grid, vec![40.0, 50.0, 60.0]);
        assert_eq!(cfg.sweep.filter_lengths, vec![2, 4]);
        assert_eq!(cfg.sweep.block_lengths, vec![512]);
        assert_eq!(cfg.sweep.trials, 2);
        assert_eq!(cfg.sweep.master_seed, 42);
        assert_eq!(cfg.sweep.qbits, 10);
        assert_eq!(cfg.sweep.levels, 4);
        assert_eq!(cfg.study.cr, 55.0);
        assert_eq!(cfg.study.trials, 80);
        // shared keys propagate into the study
        assert_eq!(cfg.study.master_seed, 42);
        assert_eq!(cfg.study.qbits, 10);
        assert_eq!(cfg.study.levels, 4);
        assert_eq!(cfg.study.link_rate_bps, 125_000.0);
        // the override reaches the study channel list
        let good = cfg.study.channels.iter().find(|c| c.name == "good").unwrap();
        assert_eq!(good.ber, 2e-4);
    }

    #[test]
    fn custom_channels_get_fresh_ids() {
        let text = "\
[channel.awful]
ber = 0.01

[study]
channels = bad, awful
";
        let cfg = parse_config(text, "test.cfg").unwrap();
        let awful = cfg.channels.iter().find(|c| c.name == "awful").unwrap();
        assert_eq!(awful.id, 5);
        assert_eq!(cfg.study.channels.len(), 2);
        assert_eq!(cfg.study.channels[1].name, "awful");
    }

    #[test]
    fn unknown_keys_and_sections_are_errors() {
        assert!(parse_config("[sweep]\nfrobnicate = 3\n", "t.cfg").is_err());
        assert!(parse_config("[nonsense]\nx = 1\n", "t.cfg").is_err());
        assert!(parse_config("[study]\nchannels = marginal\n", "t.cfg").is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config("[sweep]\ntrials = two\n", "t.cfg").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn comments_and_blanks_are_ignored()
    {
        let text = "\n; leading comment\n[sweep]\ntrials = 3  # inline\n\n";
        let cfg = parse_config(text, "t.cfg").unwrap();
        assert_eq!(cfg.sweep.trials, 3);
    }
}
