//! Closed-form successful transmission probabilities (STP).
//!
//! A file stored with code `c` (`s = 1/c`) is delivered as `c` subfiles of
//! `s S` bits, each sent by one of the nearest BSs over the whole band and
//! slot. Subfile `j` decodes iff `SIR_j > 2^(s S/(W T)) - 1` after the `j-1`
//! nearer signals are cancelled. Treating the stage events as independent,
//! stage `j` succeeds with probability `(1 + theta(s))^-j`, where
//!
//! ```text
//! theta(s) = (2/alpha) (2^(sS/WT) - 1)^(2/alpha) B'(2/alpha, 1 - 2/alpha, 2^(-sS/WT))
//! ```
//!
//! so decoding the `i` nearest signals succeeds with `h(s, i) = (1 + theta)^(-i(i+1)/2)`.
//! Nothing here depends on the BS density.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{validate_rlnc, validate_uc, Popularity, RlncAllocation, SystemConfig, UcAllocation};
use crate::special::{beta_complement_with, beta_with, QuadratureSpec};

/// `theta(s)` for one per-subfile rate; zero for zero-size files.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SicNoiseFactor(pub f64);

impl SicNoiseFactor {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Probability that stage `j` of the SIC chain decodes.
    pub fn stage_success(self, j: u32) -> f64 {
        (-(j as f64) * self.0.ln_1p()).exp()
    }

    /// Probability that the `i` nearest signals all decode.
    pub fn chain_success(self, i: u32) -> f64 {
        let stages = (i as f64) * (i as f64 + 1.0) / 2.0;
        (-stages * self.0.ln_1p()).exp()
    }
}

/// Per-file success probabilities and their popularity-weighted total.
#[derive(Debug, Clone, PartialEq)]
pub struct StpBreakdown {
    pub per_file: Vec<f64>,
    pub total: f64,
}

fn check_code(code: u32) -> Result<()> {
    if code == 0 {
        return Err(Error::Domain("code must be at least 1 for a cached file".into()));
    }
    Ok(())
}

pub fn sic_noise_factor(code: u32, cfg: &SystemConfig) -> Result<SicNoiseFactor> {
    sic_noise_factor_with(code, cfg, &QuadratureSpec::default())
}

pub fn sic_noise_factor_with(code: u32, cfg: &SystemConfig, spec: &QuadratureSpec) -> Result<SicNoiseFactor> {
    check_code(code)?;
    let rate = cfg.normalized_file_size() / code as f64;
    if rate == 0.0 {
        return Ok(SicNoiseFactor(0.0));
    }
    let delta = 2.0 / cfg.path_loss_exp();
    let threshold = (rate * LN_2).exp_m1();
    let tail = beta_complement_with(delta, 1.0 - delta, (-rate * LN_2).exp(), spec)?;
    Ok(SicNoiseFactor(delta * threshold.powf(delta) * tail))
}

/// `h(1/code, i)`: all of the `i` nearest subfile signals decode.
pub fn sic_chain_success(code: u32, i: u32, cfg: &SystemConfig) -> Result<f64> {
    Ok(sic_noise_factor(code, cfg)?.chain_success(i))
}

/// Success probability of SIC stage `j` alone, `(1 + theta)^-j`.
pub fn per_bs_decode_prob(code: u32, j: u32, cfg: &SystemConfig) -> Result<f64> {
    Ok(sic_noise_factor(code, cfg)?.stage_success(j))
}

/// Call-local memo of `theta` per code; every entry belongs to one `cfg`.
pub(crate) struct ThetaTable<'a> {
    cfg: &'a SystemConfig,
    spec: QuadratureSpec,
    values: Vec<Option<SicNoiseFactor>>,
}

impl<'a> ThetaTable<'a> {
    pub(crate) fn new(cfg: &'a SystemConfig) -> Self {
        ThetaTable { cfg, spec: QuadratureSpec::default(), values: Vec::new() }
    }

    pub(crate) fn get(&mut self, code: u32) -> Result<SicNoiseFactor> {
        let idx = code as usize;
        if idx >= self.values.len() {
            self.values.resize(idx + 1, None);
        }
        if let Some(t) = self.values[idx] {
            return Ok(t);
        }
        let t = sic_noise_factor_with(code, self.cfg, &self.spec)?;
        self.values[idx] = Some(t);
        Ok(t)
    }

    pub(crate) fn rlnc_file(&mut self, code: u32) -> Result<f64> {
        if code == 0 {
            return Ok(0.0);
        }
        Ok(self.get(code)?.chain_success(code))
    }

    pub(crate) fn uc_file(&mut self, code: u32, serve: u32) -> Result<f64> {
        if code == 0 {
            return Ok(0.0);
        }
        let theta = self.get(code)?;
        Ok((code..=serve).map(|i| coupon_pmf(code, i) * theta.chain_success(i)).sum())
    }
}

/// Per-file RLNC success `q_n^c`: zero when uncached, else `h(1/code, code)`.
pub fn stp_rlnc_file(code: u32, cfg: &SystemConfig) -> Result<f64> {
    ThetaTable::new(cfg).rlnc_file(code)
}

pub fn stp_rlnc(alloc: &RlncAllocation, a: &Popularity, cfg: &SystemConfig) -> Result<StpBreakdown> {
    validate_rlnc(alloc, cfg)?;
    a.check_len(cfg)?;
    let mut table = ThetaTable::new(cfg);
    let per_file = alloc.codes().iter().map(|&c| table.rlnc_file(c)).collect::<Result<Vec<_>>>()?;
    Ok(weigh(per_file, a))
}

fn weigh(per_file: Vec<f64>, a: &Popularity) -> StpBreakdown {
    let total = per_file.iter().zip(a.probs()).map(|(q, p)| q * p).sum();
    StpBreakdown { per_file, total }
}

/// Probability that exactly `i` uniform draws are needed to see all `code`
/// distinct subfiles (coupon collector), clamped against cancellation noise.
pub fn coupon_pmf(code: u32, i: u32) -> f64 {
    match code {
        0 => 0.0,
        1 => {
            if i == 1 {
                1.0
            } else {
                0.0
            }
        }
        c if i < c => 0.0,
        c => {
            let n = c - 1;
            let mut binom = 1.0f64;
            let mut sum = 0.0f64;
            for k in 0..=n {
                let base = 1.0 - (k as f64 + 1.0) / c as f64;
                let term = binom * base.powi(i as i32 - 1);
                sum += if k % 2 == 0 { term } else { -term };
                // C(n, k+1) = C(n, k) (n-k)/(k+1), exact for the sizes used here
                binom = binom * (n - k) as f64 / (k as f64 + 1.0);
            }
            if sum.abs() < 1e-12 {
                0.0
            } else {
                sum.clamp(0.0, 1.0)
            }
        }
    }
}

/// Per-file UC success `q_n^u = sum_{i=code}^{serve} p(code, i) h(1/code, i)`.
pub fn stp_uc_file(code: u32, serve: u32, cfg: &SystemConfig) -> Result<f64> {
    if !crate::model::serve_count_admissible(code, serve, cfg.sic_capability()) {
        return Err(crate::error::Violation::ServeCount {
            file: 0,
            code,
            serve,
            sic_capability: cfg.sic_capability(),
        }
        .into());
    }
    ThetaTable::new(cfg).uc_file(code, serve)
}

pub fn stp_uc(alloc: &UcAllocation, a: &Popularity, cfg: &SystemConfig) -> Result<StpBreakdown> {
    validate_uc(alloc, cfg)?;
    a.check_len(cfg)?;
    let mut table = ThetaTable::new(cfg);
    let per_file = alloc
        .codes()
        .iter()
        .zip(alloc.serve_counts())
        .map(|(&c, &m)| table.uc_file(c, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(weigh(per_file, a))
}

fn small_s_slope(cfg: &SystemConfig) -> f64 {
    LN_2 * cfg.normalized_file_size() / (cfg.path_loss_exp() - 2.0)
}

/// First-order expansion of the RLNC STP as `S -> 0`. Linear in `S`, so it
/// can leave `[0, 1]` far from that regime.
pub fn stp_rlnc_small_s(alloc: &RlncAllocation, a: &Popularity, cfg: &SystemConfig) -> Result<f64> {
    validate_rlnc(alloc, cfg)?;
    a.check_len(cfg)?;
    let mut hit = 0.0;
    let mut penalty = 0.0;
    for (&c, &p) in alloc.codes().iter().zip(a.probs()) {
        if c != 0 {
            hit += p;
            penalty += p * (1.0 + c as f64);
        }
    }
    Ok(hit - small_s_slope(cfg) * penalty)
}

/// First-order expansion of the UC STP as `S -> 0`.
pub fn stp_uc_small_s(alloc: &UcAllocation, a: &Popularity, cfg: &SystemConfig) -> Result<f64> {
    validate_uc(alloc, cfg)?;
    a.check_len(cfg)?;
    let mut hit = 0.0;
    let mut penalty = 0.0;
    for ((&c, &m), &p) in alloc.codes().iter().zip(alloc.serve_counts()).zip(a.probs()) {
        if c == 0 {
            continue;
        }
        let s = 1.0 / c as f64;
        for i in c..=m {
            let pmf = coupon_pmf(c, i);
            hit += p * pmf;
            penalty += p * s * pmf * (i as f64 + 1.0) * i as f64;
        }
    }
    Ok(hit - small_s_slope(cfg) * penalty)
}

/// Smallest nonzero code, i.e. the largest storage fraction `s_max`.
fn min_code(codes: &[u32]) -> Result<u32> {
    codes
        .iter()
        .copied()
        .filter(|&c| c > 0)
        .min()
        .ok_or_else(|| Error::Domain("asymptotic large-file formula needs at least one cached file".into()))
}

/// `2^(-(s+1) S/(alpha s W T)) / ((2/alpha) B(2/alpha, 1-2/alpha))^((s+1)/(2 s^2))`
/// for `s = 1/code`: the large-`S` behavior of `h(s, 1/s)`.
pub(crate) fn large_s_factor(code: u32, cfg: &SystemConfig) -> Result<f64> {
    let alpha = cfg.path_loss_exp();
    let delta = 2.0 / alpha;
    let b = beta_with(delta, 1.0 - delta, &QuadratureSpec::default())?;
    let s = 1.0 / code as f64;
    let decay = -(s + 1.0) * cfg.normalized_file_size() / (alpha * s);
    let power = (s + 1.0) / (2.0 * s * s);
    Ok(decay.exp2() / (delta * b).powf(power))
}

/// Leading term of the RLNC STP as `S -> infinity`; only files stored with the
/// largest fraction `s_max` contribute.
pub fn stp_rlnc_large_s(alloc: &RlncAllocation, a: &Popularity, cfg: &SystemConfig) -> Result<f64> {
    validate_rlnc(alloc, cfg)?;
    a.check_len(cfg)?;
    let code = min_code(alloc.codes())?;
    let mass: f64 = alloc.codes().iter().zip(a.probs()).filter(|(&c, _)| c == code).map(|(_, p)| p).sum();
    Ok(large_s_factor(code, cfg)? * mass)
}

/// Leading term of the UC STP as `S -> infinity`: the RLNC term scaled by the
/// chance that the `1/s_max` nearest BSs hold distinct subfiles. Serve counts
/// play no role.
pub fn stp_uc_large_s(alloc: &UcAllocation, a: &Popularity, cfg: &SystemConfig) -> Result<f64> {
    validate_uc(alloc, cfg)?;
    a.check_len(cfg)?;
    let code = min_code(alloc.codes())?;
    let mass: f64 = alloc.codes().iter().zip(a.probs()).filter(|(&c, _)| c == code).map(|(_, p)| p).sum();
    Ok(large_s_factor(code, cfg)? * coupon_pmf(code, code) * mass)
}
