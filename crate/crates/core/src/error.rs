use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A broken feasibility rule for a cache allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `s_n = 1/code` with `code > M`: more subfiles than the SIC receiver can decode.
    CodeExceedsSic { file: usize, code: u32, sic_capability: u32 },
    /// Total storage `sum s_n` exceeds the per-BS cache size.
    CacheOverflow { load: Ratio<u128>, capacity: u32 },
    /// `(s_n, m_n)` is outside the admissible serve-count set.
    ServeCount { file: usize, code: u32, serve: u32, sic_capability: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CodeExceedsSic { file, code, sic_capability } => write!(
                f,
                "file {}: code {code} exceeds sic_capability M={sic_capability} \
                 (s_n must be 0 or 1/m with 1 <= m <= M)",
                file + 1
            ),
            Violation::CacheOverflow { load, capacity } => write!(
                f,
                "cache constraint violated: sum of s_n = {load} exceeds cache_size K={capacity}"
            ),
            Violation::ServeCount { file, code, serve, sic_capability } => {
                let rule = match code {
                    0 => "uncached files must have serve count 0".to_string(),
                    1 => "whole files are served by exactly one BS".to_string(),
                    c => format!("serve count must lie in {c}..={sic_capability}"),
                };
                write!(f, "file {}: (code {code}, serve {serve}) not admissible: {rule}", file + 1)
            }
        }
    }
}

impl std::error::Error for Violation {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid popularity: {0}")]
    InvalidPopularity(String),

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Constraint(#[from] Violation),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("quadrature failed to reach tolerance {tol:e} within {subdivisions} subdivisions (estimated error {estimate:e})")]
    Quadrature { tol: f64, subdivisions: usize, estimate: f64 },

    #[error("exhaustive search over {candidates} candidates exceeds the budget of {budget}; use the greedy method")]
    BudgetExceeded { candidates: f64, budget: u64 },

    #[error("unsupported MCKP instance: {0}")]
    UnsupportedInstance(String),

    #[error("{0}")]
    Hypothesis(String),

    #[error("network realization has {found} base stations, at least {needed} required")]
    InsufficientBaseStations { found: usize, needed: usize },

    #[error("truncation disc would need {expected_count:.3e} base stations on average (limit {limit:.3e})")]
    TruncationTooLarge { expected_count: f64, limit: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
