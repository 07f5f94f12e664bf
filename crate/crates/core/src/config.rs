//! Line-oriented `key = value` configuration files.
//!
//! ```text
//! # small reference network
//! n_files = 5
//! cache_size = 2
//! sic_capability = 3
//! path_loss_exp = 4
//! bandwidth_hz = 10e6
//! slot_duration_s = 1e-3
//! file_size_bits = 1e4
//! bs_density = 1e-4     # optional, default 1e-4
//! zipf_gamma = 1.0      # optional, default 1.0
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown or repeated keys are errors.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Popularity, SystemConfig, SystemParams};

pub const DEFAULT_BS_DENSITY: f64 = 1e-4;
pub const DEFAULT_ZIPF_GAMMA: f64 = 1.0;

pub const CONFIG_KEYS: [&str; 9] = [
    "n_files",
    "cache_size",
    "sic_capability",
    "path_loss_exp",
    "bandwidth_hz",
    "slot_duration_s",
    "file_size_bits",
    "bs_density",
    "zipf_gamma",
];

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub(crate) fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Parse { line, message: "empty key".into() });
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(Error::Parse { line, message: format!("key `{key}` already set on line {}", prev.line) });
        }
        entries.push(Entry { line, key, value: value.trim().to_string() });
    }
    Ok(entries)
}

pub(crate) fn parse_value<T: FromStr>(entry: &Entry) -> Result<T> {
    entry.value.parse().map_err(|_| Error::Parse {
        line: entry.line,
        message: format!("invalid value `{}` for `{}`", entry.value, entry.key),
    })
}

/// A network configuration plus the Zipf exponent of the request law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub zipf_gamma: f64,
}

impl ExperimentConfig {
    pub fn popularity(&self) -> Result<Popularity> {
        Popularity::zipf(self.system.n_files(), self.zipf_gamma)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let (cfg, rest) = Self::from_entries(entries)?;
        if let Some(e) = rest.first() {
            return Err(Error::Parse { line: e.line, message: format!("unknown key `{}`", e.key) });
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Consumes the configuration keys and hands back everything else.
    pub(crate) fn from_entries(entries: Vec<Entry>) -> Result<(Self, Vec<Entry>)> {
        let (ours, rest): (Vec<Entry>, Vec<Entry>) =
            entries.into_iter().partition(|e| CONFIG_KEYS.contains(&e.key.as_str()));
        let find = |key: &str| ours.iter().find(|e| e.key == key);
        fn required<'a>(e: Option<&'a Entry>, key: &str) -> Result<&'a Entry> {
            e.ok_or_else(|| Error::Parse { line: 0, message: format!("missing required key `{key}`") })
        }
        let params = SystemParams {
            n_files: parse_value(required(find("n_files"), "n_files")?)?,
            cache_size: parse_value(required(find("cache_size"), "cache_size")?)?,
            sic_capability: parse_value(required(find("sic_capability"), "sic_capability")?)?,
            path_loss_exp: parse_value(required(find("path_loss_exp"), "path_loss_exp")?)?,
            bandwidth_hz: parse_value(required(find("bandwidth_hz"), "bandwidth_hz")?)?,
            slot_duration_s: parse_value(required(find("slot_duration_s"), "slot_duration_s")?)?,
            file_size_bits: parse_value(required(find("file_size_bits"), "file_size_bits")?)?,
            bs_density: find("bs_density").map(parse_value).transpose()?.unwrap_or(DEFAULT_BS_DENSITY),
        };
        let zipf_gamma = find("zipf_gamma").map(parse_value).transpose()?.unwrap_or(DEFAULT_ZIPF_GAMMA);
        let system = SystemConfig::new(params).map_err(|e| {
            let line = match &e {
                Error::InvalidParameter { name, .. } => find(name).map_or(0, |x| x.line),
                _ => 0,
            };
            Error::Parse { line, message: e.to_string() }
        })?;
        if !(zipf_gamma > 0.0 && zipf_gamma.is_finite()) {
            let line = find("zipf_gamma").map_or(0, |e| e.line);
            return Err(Error::Parse { line, message: format!("zipf_gamma must be positive, got {zipf_gamma}") });
        }
        Ok((ExperimentConfig { system, zipf_gamma }, rest))
    }

    /// Renders the configuration back into the file format.
    pub fn to_text(&self) -> String {
        let p = self.system.params();
        format!(
            "n_files = {}\ncache_size = {}\nsic_capability = {}\npath_loss_exp = {}\n\
             bandwidth_hz = {}\nslot_duration_s = {}\nfile_size_bits = {}\nbs_density = {}\nzipf_gamma = {}\n",
            p.n_files,
            p.cache_size,
            p.sic_capability,
            p.path_loss_exp,
            p.bandwidth_hz,
            p.slot_duration_s,
            p.file_size_bits,
            p.bs_density,
            self.zipf_gamma
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = "n_files = 5\ncache_size = 2\nsic_capability = 3\npath_loss_exp = 4\n\
                        bandwidth_hz = 10e6\nslot_duration_s = 1e-3\nfile_size_bits = 1e4\n";

    #[test]
    fn defaults_apply() {
        let c = ExperimentConfig::parse(FIG2).unwrap();
        assert_eq!(c.system.bs_density(), DEFAULT_BS_DENSITY);
        assert_eq!(c.zipf_gamma, DEFAULT_ZIPF_GAMMA);
        assert!((c.system.normalized_file_size() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{FIG2}zipf_gamma = 0.8 # skewed\n");
        assert_eq!(ExperimentConfig::parse(&text).unwrap().zipf_gamma, 0.8);
    }

    #[test]
    fn unknown_key_names_its_line() {
        let text = format!("{FIG2}power_w = 1\n");
        match ExperimentConfig::parse(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 8);
                assert!(message.contains("power_w"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_and_malformed_keys() {
        let text = FIG2.replace("cache_size = 2\n", "");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Parse { message, .. }) if message.contains("cache_size")));
        let text = FIG2.replace("= 2\n", "= two\n");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Parse { line: 2, .. })));
        let text = format!("{FIG2}n_files = 6\n");
        assert!(ExperimentConfig::parse(&text).is_err());
        let text = FIG2.replace("cache_size = 2", "cache_size = 9");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn text_round_trip() {
        let c = ExperimentConfig::parse(FIG2).unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }
}
