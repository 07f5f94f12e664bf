//! Cache-allocation optimizers for both designs.

mod mckp;

pub use mckp::{
    build_mckp, exhaustive_mckp, greedy_mckp, greedy_mckp_traced, undominated_indices, Design, GreedyOutcome,
    GreedyStep, MckpInstance, MckpSelection, DEFAULT_EXHAUSTIVE_BUDGET,
};

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::analysis::{large_s_factor, stp_rlnc, stp_uc};
use crate::error::{Error, Result};
use crate::model::{default_serve_counts, Popularity, RlncAllocation, SystemConfig, UcAllocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Greedy,
    Exhaustive,
    AsymptoticSmall,
    AsymptoticLarge,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Exhaustive => "exhaustive",
            Method::AsymptoticSmall => "asymptotic-small",
            Method::AsymptoticLarge => "asymptotic-large",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Method::Greedy),
            "exhaustive" => Ok(Method::Exhaustive),
            "asymptotic-small" => Ok(Method::AsymptoticSmall),
            "asymptotic-large" => Ok(Method::AsymptoticLarge),
            other => Err(Error::param("method", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Allocation {
    Rlnc(RlncAllocation),
    Uc(UcAllocation),
}

impl Allocation {
    pub fn codes(&self) -> &[u32] {
        match self {
            Allocation::Rlnc(a) => a.codes(),
            Allocation::Uc(a) => a.codes(),
        }
    }

    pub fn serve_counts(&self) -> Option<&[u32]> {
        match self {
            Allocation::Rlnc(_) => None,
            Allocation::Uc(a) => Some(a.serve_counts()),
        }
    }

    pub fn design(&self) -> Design {
        match self {
            Allocation::Rlnc(_) => Design::Rlnc,
            Allocation::Uc(_) => Design::Uc,
        }
    }

    /// Exact STP of this allocation.
    pub fn evaluate(&self, a: &Popularity, cfg: &SystemConfig) -> Result<f64> {
        Ok(match self {
            Allocation::Rlnc(x) => stp_rlnc(x, a, cfg)?.total,
            Allocation::Uc(x) => stp_uc(x, a, cfg)?.total,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub allocation: Allocation,
    /// STP of `allocation` from the exact analysis.
    pub objective: f64,
    pub method: Method,
    /// Lower bound on `objective / optimum`; asymptotic solutions only attain
    /// it in their regime.
    pub guarantee: f64,
    /// The solution is known to be optimal for this instance.
    pub certified_optimal: bool,
    /// The closed-form optimal value of the asymptotic problem, when solved
    /// in closed form.
    pub asymptotic_value: Option<f64>,
}

fn finish(
    codes: Vec<u32>,
    kind: Design,
    a: &Popularity,
    cfg: &SystemConfig,
    method: Method,
    guarantee: f64,
    certified_optimal: bool,
    asymptotic_value: Option<f64>,
) -> Result<OptimizationResult> {
    let allocation = match kind {
        Design::Rlnc => Allocation::Rlnc(RlncAllocation::new(codes)),
        Design::Uc => {
            let serve = default_serve_counts(&codes, cfg.sic_capability());
            Allocation::Uc(UcAllocation::new(codes, serve))
        }
    };
    let objective = allocation.evaluate(a, cfg)?;
    Ok(OptimizationResult { allocation, objective, method, guarantee, certified_optimal, asymptotic_value })
}

fn top_k(n: usize, k: usize, code: u32) -> Vec<u32> {
    (0..n).map(|i| if i < k { code } else { 0 }).collect()
}

fn solve(kind: Design, a: &Popularity, cfg: &SystemConfig, method: Method, budget: u64) -> Result<OptimizationResult> {
    a.check_len(cfg)?;
    match method {
        Method::Greedy | Method::Exhaustive if cfg.sic_capability() == 1 => {
            let codes = top_k(cfg.n_files(), cfg.cache_size() as usize, 1);
            finish(codes, kind, a, cfg, method, 1.0, true, None)
        }
        Method::Greedy => {
            let inst = build_mckp(kind, a, cfg)?;
            let out = greedy_mckp_traced(&inst)?;
            finish(out.selection.codes(), kind, a, cfg, method, 0.5, out.certified_optimal, None)
        }
        Method::Exhaustive => {
            let inst = build_mckp(kind, a, cfg)?;
            let sel = exhaustive_mckp(&inst, budget)?;
            finish(sel.codes(), kind, a, cfg, method, 1.0, true, None)
        }
        Method::AsymptoticSmall => match kind {
            Design::Rlnc => asymptotic_opt_rlnc_small(a, cfg),
            Design::Uc => Err(Error::param(
                "method",
                "no closed-form small-file optimum is available for the uncoded design",
            )),
        },
        Method::AsymptoticLarge => match kind {
            Design::Rlnc => asymptotic_opt_rlnc_large(a, cfg),
            Design::Uc => asymptotic_opt_uc_large(a, cfg),
        },
    }
}

pub fn solve_rlnc(a: &Popularity, cfg: &SystemConfig, method: Method) -> Result<OptimizationResult> {
    solve(Design::Rlnc, a, cfg, method, DEFAULT_EXHAUSTIVE_BUDGET)
}

pub fn solve_uc(a: &Popularity, cfg: &SystemConfig, method: Method) -> Result<OptimizationResult> {
    solve(Design::Uc, a, cfg, method, DEFAULT_EXHAUSTIVE_BUDGET)
}

/// As [`solve_rlnc`] / [`solve_uc`] with an explicit exhaustive budget.
pub fn solve_with_budget(
    kind: Design,
    a: &Popularity,
    cfg: &SystemConfig,
    method: Method,
    budget: u64,
) -> Result<OptimizationResult> {
    solve(kind, a, cfg, method, budget)
}

/// Small-file optimum of the RLNC design: the `K M` most popular files, each
/// split into `M` parts. Needs `K M <= N`.
pub fn asymptotic_opt_rlnc_small(a: &Popularity, cfg: &SystemConfig) -> Result<OptimizationResult> {
    a.check_len(cfg)?;
    let (k, m, n) = (cfg.cache_size() as usize, cfg.sic_capability(), cfg.n_files());
    let cached = k * m as usize;
    if cached > n {
        return Err(Error::Hypothesis(format!(
            "small-file optimum needs cache_size * sic_capability <= n_files, got {k} * {m} = {cached} > {n}"
        )));
    }
    let mass: f64 = a.probs()[..cached].iter().sum();
    let slope = LN_2 * (1.0 + m as f64) * cfg.normalized_file_size() / (cfg.path_loss_exp() - 2.0);
    let value = (1.0 - slope) * mass;
    finish(top_k(n, cached, m), Design::Rlnc, a, cfg, Method::AsymptoticSmall, 1.0, false, Some(value))
}

fn large_value(a: &Popularity, cfg: &SystemConfig) -> Result<f64> {
    let mass: f64 = a.probs()[..cfg.cache_size() as usize].iter().sum();
    Ok(large_s_factor(1, cfg)? * mass)
}

/// Large-file optimum of the RLNC design: the `K` most popular whole files.
pub fn asymptotic_opt_rlnc_large(a: &Popularity, cfg: &SystemConfig) -> Result<OptimizationResult> {
    a.check_len(cfg)?;
    let value = large_value(a, cfg)?;
    let codes = top_k(cfg.n_files(), cfg.cache_size() as usize, 1);
    finish(codes, Design::Rlnc, a, cfg, Method::AsymptoticLarge, 1.0, false, Some(value))
}

/// Large-file optimum of the UC design; the same whole-file placement.
pub fn asymptotic_opt_uc_large(a: &Popularity, cfg: &SystemConfig) -> Result<OptimizationResult> {
    a.check_len(cfg)?;
    let value = large_value(a, cfg)?;
    let codes = top_k(cfg.n_files(), cfg.cache_size() as usize, 1);
    finish(codes, Design::Uc, a, cfg, Method::AsymptoticLarge, 1.0, false, Some(value))
}
