//! Domain types shared by the analysis, optimization and simulation layers.
//!
//! The per-file storage fraction `s_n` is never held as a float. It is stored
//! as an integer *code*: `0` means the file is not cached and `m >= 1` means
//! `s_n = 1/m` (the file is split into `m` subfiles and every BS keeps one
//! coded or uncoded subfile of it). The cache constraint `sum s_n <= K` is
//! then checked in exact rational arithmetic.

use num_rational::Ratio;

use crate::error::{Error, Result, Violation};

/// Largest supported SIC capability. Keeps `lcm(1..=M)` comfortably inside `u128`.
pub const MAX_SIC_CAPABILITY: u32 = 40;

/// Plain parameter bundle used to build a [`SystemConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub n_files: u32,
    pub cache_size: u32,
    pub sic_capability: u32,
    pub path_loss_exp: f64,
    pub bandwidth_hz: f64,
    pub slot_duration_s: f64,
    pub file_size_bits: f64,
    pub bs_density: f64,
}

/// Validated physical and cache parameters.
///
/// Transmit power is deliberately absent: the network is interference
/// limited and power cancels from every SIR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    params: SystemParams,
}

impl SystemConfig {
    pub fn new(params: SystemParams) -> Result<Self> {
        let p = &params;
        if p.n_files == 0 {
            return Err(Error::param("n_files", "must be positive"));
        }
        if p.cache_size == 0 {
            return Err(Error::param("cache_size", "must be positive"));
        }
        if p.cache_size >= p.n_files {
            return Err(Error::param(
                "cache_size",
                format!("K={} must be smaller than n_files N={}", p.cache_size, p.n_files),
            ));
        }
        if p.sic_capability == 0 || p.sic_capability > MAX_SIC_CAPABILITY {
            return Err(Error::param(
                "sic_capability",
                format!("must lie in 1..={MAX_SIC_CAPABILITY}, got {}", p.sic_capability),
            ));
        }
        if !(p.path_loss_exp > 2.0 && p.path_loss_exp.is_finite()) {
            return Err(Error::param("path_loss_exp", format!("must exceed 2, got {}", p.path_loss_exp)));
        }
        for (name, v) in [
            ("bandwidth_hz", p.bandwidth_hz),
            ("slot_duration_s", p.slot_duration_s),
            ("bs_density", p.bs_density),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(p.file_size_bits >= 0.0 && p.file_size_bits.is_finite()) {
            return Err(Error::param(
                "file_size_bits",
                format!("must be non-negative and finite, got {}", p.file_size_bits),
            ));
        }
        Ok(SystemConfig { params })
    }

    pub fn params(&self) -> SystemParams {
        self.params
    }

    pub fn n_files(&self) -> usize {
        self.params.n_files as usize
    }

    pub fn cache_size(&self) -> u32 {
        self.params.cache_size
    }

    pub fn sic_capability(&self) -> u32 {
        self.params.sic_capability
    }

    pub fn path_loss_exp(&self) -> f64 {
        self.params.path_loss_exp
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.params.bandwidth_hz
    }

    pub fn slot_duration_s(&self) -> f64 {
        self.params.slot_duration_s
    }

    pub fn file_size_bits(&self) -> f64 {
        self.params.file_size_bits
    }

    pub fn bs_density(&self) -> f64 {
        self.params.bs_density
    }

    /// `S / (W T)`: bits per file over bits deliverable in one slot at 1 bit/s/Hz.
    pub fn normalized_file_size(&self) -> f64 {
        self.params.file_size_bits / (self.params.bandwidth_hz * self.params.slot_duration_s)
    }

    /// Same configuration with a different file size.
    pub fn with_file_size(&self, file_size_bits: f64) -> Result<Self> {
        SystemConfig::new(SystemParams { file_size_bits, ..self.params })
    }

    /// Same configuration with the file size chosen so that `S/(WT) = ratio`.
    pub fn with_normalized_file_size(&self, ratio: f64) -> Result<Self> {
        self.with_file_size(ratio * self.params.bandwidth_hz * self.params.slot_duration_s)
    }

    pub fn with_bs_density(&self, bs_density: f64) -> Result<Self> {
        SystemConfig::new(SystemParams { bs_density, ..self.params })
    }
}

/// File request probabilities `a_1 > a_2 > ... > a_N`, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Popularity {
    probs: Vec<f64>,
}

impl Popularity {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPopularity("no files".into()));
        }
        for (n, &p) in probs.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidPopularity(format!("a_{} = {p} is not in (0,1)", n + 1)));
            }
        }
        if let Some(n) = probs.windows(2).position(|w| w[0] <= w[1]) {
            return Err(Error::InvalidPopularity(format!(
                "not strictly descending at files {} and {} ({} <= {})",
                n + 1,
                n + 2,
                probs[n],
                probs[n + 1]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPopularity(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Popularity { probs })
    }

    /// Zipf law `a_n = n^-gamma / sum_k k^-gamma`.
    pub fn zipf(n_files: usize, gamma: f64) -> Result<Self> {
        zipf_popularity(n_files, gamma)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub(crate) fn check_len(&self, cfg: &SystemConfig) -> Result<()> {
        if self.len() != cfg.n_files() {
            return Err(Error::LengthMismatch { expected: cfg.n_files(), got: self.len() });
        }
        Ok(())
    }
}

pub fn zipf_popularity(n_files: usize, gamma: f64) -> Result<Popularity> {
    if n_files < 2 {
        return Err(Error::param("n_files", "Zipf popularity needs at least two files"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::param("zipf_gamma", format!("must be non-negative, got {gamma}")));
    }
    let weights: Vec<f64> = (1..=n_files).map(|n| (n as f64).powf(-gamma)).collect();
    // Sum smallest-first for a slightly tighter total.
    let total: f64 = weights.iter().rev().sum();
    Popularity::new(weights.into_iter().map(|w| w / total).collect())
}

/// RLNC design parameter `s`, one code per file (`0` = not cached, `m` = `s_n = 1/m`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RlncAllocation {
    codes: Vec<u32>,
}

impl RlncAllocation {
    pub fn new(codes: Vec<u32>) -> Self {
        RlncAllocation { codes }
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Storage per BS, `sum_n s_n`, exactly.
    pub fn cache_load(&self) -> Ratio<u128> {
        cache_load(&self.codes)
    }
}

/// UC design: storage codes plus the number of nearest BSs serving each file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UcAllocation {
    codes: Vec<u32>,
    serve_counts: Vec<u32>,
}

impl UcAllocation {
    pub fn new(codes: Vec<u32>, serve_counts: Vec<u32>) -> Self {
        UcAllocation { codes, serve_counts }
    }

    /// Pairs the codes with the serve counts that maximize success for fixed codes.
    pub fn with_default_serve_counts(codes: Vec<u32>, sic_capability: u32) -> Self {
        let serve_counts = default_serve_counts(&codes, sic_capability);
        UcAllocation { codes, serve_counts }
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn serve_counts(&self) -> &[u32] {
        &self.serve_counts
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn cache_load(&self) -> Ratio<u128> {
        cache_load(&self.codes)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `sum_{c_n >= 1} 1/c_n` as an exact fraction.
pub fn cache_load(codes: &[u32]) -> Ratio<u128> {
    let lcm = codes
        .iter()
        .filter(|&&c| c > 0)
        .fold(1u128, |l, &c| l / gcd(l, c as u128) * c as u128);
    let units: u128 = codes.iter().filter(|&&c| c > 0).map(|&c| lcm / c as u128).sum();
    Ratio::new(units, lcm)
}

fn check_codes(codes: &[u32], cfg: &SystemConfig) -> Result<()> {
    if codes.len() != cfg.n_files() {
        return Err(Error::LengthMismatch { expected: cfg.n_files(), got: codes.len() });
    }
    let m = cfg.sic_capability();
    if let Some((file, &code)) = codes.iter().enumerate().find(|(_, &c)| c > m) {
        return Err(Violation::CodeExceedsSic { file, code, sic_capability: m }.into());
    }
    let load = cache_load(codes);
    if load > Ratio::from_integer(cfg.cache_size() as u128) {
        return Err(Violation::CacheOverflow { load, capacity: cfg.cache_size() }.into());
    }
    Ok(())
}

/// Accepts iff every code is at most `M` and the cache constraint holds exactly.
pub fn validate_rlnc(alloc: &RlncAllocation, cfg: &SystemConfig) -> Result<()> {
    check_codes(&alloc.codes, cfg)
}

/// Accepts iff every `(code, serve)` pair is admissible and the cache constraint holds.
pub fn validate_uc(alloc: &UcAllocation, cfg: &SystemConfig) -> Result<()> {
    if alloc.serve_counts.len() != alloc.codes.len() {
        return Err(Error::LengthMismatch { expected: alloc.codes.len(), got: alloc.serve_counts.len() });
    }
    check_codes(&alloc.codes, cfg)?;
    let m = cfg.sic_capability();
    for (file, (&code, &serve)) in alloc.codes.iter().zip(&alloc.serve_counts).enumerate() {
        if !serve_count_admissible(code, serve, m) {
            return Err(Violation::ServeCount { file, code, serve, sic_capability: m }.into());
        }
    }
    Ok(())
}

pub(crate) fn serve_count_admissible(code: u32, serve: u32, sic_capability: u32) -> bool {
    match code {
        0 => serve == 0,
        1 => serve == 1,
        c => c <= serve && serve <= sic_capability,
    }
}

/// Serve counts used when optimizing UC: all `M` nearest BSs serve a partitioned file.
pub fn default_serve_counts(codes: &[u32], sic_capability: u32) -> Vec<u32> {
    codes
        .iter()
        .map(|&c| match c {
            0 => 0,
            1 => 1,
            _ => sic_capability,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, k: u32, m: u32) -> SystemConfig {
        SystemConfig::new(SystemParams {
            n_files: n,
            cache_size: k,
            sic_capability: m,
            path_loss_exp: 4.0,
            bandwidth_hz: 1e7,
            slot_duration_s: 1e-3,
            file_size_bits: 1e4,
            bs_density: 1e-4,
        })
        .unwrap()
    }

    #[test]
    fn zipf_matches_harmonic_sums() {
        let a = zipf_popularity(5, 1.0).unwrap();
        assert!((a.probs()[0] - 60.0 / 137.0).abs() < 1e-15);
        let a = zipf_popularity(2, 1.0).unwrap();
        assert!((a.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.probs()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zipf_rejects_ties_and_tiny_catalogues() {
        assert!(matches!(zipf_popularity(4, 0.0), Err(Error::InvalidPopularity(_))));
        assert!(zipf_popularity(1, 1.0).is_err());
    }

    #[test]
    fn zipf_is_valid_for_common_exponents() {
        for gamma in [0.4, 0.8, 1.0, 1.5] {
            for n in [2, 5, 100, 1000] {
                let a = zipf_popularity(n, gamma).unwrap();
                assert_eq!(a.len(), n);
            }
        }
    }

    #[test]
    fn popularity_rejects_bad_vectors() {
        assert!(Popularity::new(vec![0.5, 0.5]).is_err());
        assert!(Popularity::new(vec![0.3, 0.7]).is_err());
        assert!(Popularity::new(vec![0.6, 0.3]).is_err());
        assert!(Popularity::new(vec![1.0]).is_err());
        assert!(Popularity::new(vec![0.7, 0.2, 0.1]).is_ok());
    }

    #[test]
    fn rlnc_validation_examples() {
        assert!(validate_rlnc(&RlncAllocation::new(vec![1, 0, 0]), &cfg(3, 1, 1)).is_ok());
        let err = validate_rlnc(&RlncAllocation::new(vec![1, 1, 0]), &cfg(3, 1, 1)).unwrap_err();
        assert!(matches!(err, Error::Constraint(Violation::CacheOverflow { .. })));
        assert!(validate_rlnc(&RlncAllocation::new(vec![3, 3, 3, 0, 0]), &cfg(5, 1, 3)).is_ok());
        let err = validate_rlnc(&RlncAllocation::new(vec![4, 0, 0]), &cfg(3, 1, 3)).unwrap_err();
        assert!(matches!(err, Error::Constraint(Violation::CodeExceedsSic { code: 4, .. })));
        let err = validate_rlnc(&RlncAllocation::new(vec![1, 0]), &cfg(3, 1, 3)).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { expected: 3, got: 2 }));
    }

    #[test]
    fn exact_rational_cache_boundary() {
        for m in 1..=8u32 {
            for k in 1..=4u32 {
                let full = (k * m) as usize;
                let c = cfg(full as u32 + 2, k, m);
                let mut codes = vec![m; full];
                codes.resize(c.n_files(), 0);
                assert!(validate_rlnc(&RlncAllocation::new(codes.clone()), &c).is_ok(), "M={m} K={k}");
                codes[full] = m;
                assert!(validate_rlnc(&RlncAllocation::new(codes), &c).is_err(), "M={m} K={k}");
            }
        }
    }

    #[test]
    fn uc_validation_examples() {
        let c = cfg(2, 1, 3);
        let ok = UcAllocation::new(vec![2, 0], vec![2, 0]);
        assert!(validate_uc(&ok, &c).is_ok());
        let low = UcAllocation::new(vec![2, 0], vec![1, 0]);
        assert!(matches!(validate_uc(&low, &c), Err(Error::Constraint(Violation::ServeCount { .. }))));
        let whole = UcAllocation::new(vec![1, 0], vec![3, 0]);
        assert!(matches!(validate_uc(&whole, &c), Err(Error::Constraint(Violation::ServeCount { .. }))));
        let uncached = UcAllocation::new(vec![0, 0], vec![0, 1]);
        assert!(validate_uc(&uncached, &c).is_err());
        let over = UcAllocation::new(vec![2, 0], vec![4, 0]);
        assert!(validate_uc(&over, &c).is_err());
    }

    #[test]
    fn serve_count_defaults() {
        assert_eq!(default_serve_counts(&[0, 1, 2], 3), vec![0, 1, 3]);
        assert_eq!(default_serve_counts(&[0, 0], 5), vec![0, 0]);
        assert_eq!(default_serve_counts(&[4], 4), vec![4]);
    }

    #[test]
    fn config_rejects_out_of_range() {
        let mut p = cfg(5, 2, 3).params();
        p.cache_size = 5;
        assert!(SystemConfig::new(p).is_err());
        let mut p = cfg(5, 2, 3).params();
        p.path_loss_exp = 2.0;
        assert!(SystemConfig::new(p).is_err());
        let mut p = cfg(5, 2, 3).params();
        p.file_size_bits = 0.0;
        assert!(SystemConfig::new(p).is_ok());
        p.bs_density = 0.0;
        assert!(SystemConfig::new(p).is_err());
    }
}
