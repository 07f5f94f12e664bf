//! Self-checks that tie the closed forms, the optimizers and the simulator
//! together. Used by `partcache validate` and the acceptance tests.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{self, stp_rlnc, stp_uc};
use crate::error::Result;
use crate::model::{default_serve_counts, Popularity, RlncAllocation, SystemConfig, SystemParams, UcAllocation};
use crate::optimize::{self, Design, Method};
use crate::sim::{simulate_cases, Baseline, McEstimate, SimCase, SimDesign, SimOptions, TruncationRule};
use crate::special;

pub const CHECK_IDS: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Knobs for the checks. `coupon_pmf` exists so tests can plant a faulty
/// implementation and watch the enumeration check catch it.
#[derive(Clone, Copy)]
pub struct ValidationOptions {
    pub seed: u64,
    pub coupon_pmf: fn(u32, u32) -> f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { seed: 0, coupon_pmf: analysis::coupon_pmf }
    }
}

impl fmt::Debug for ValidationOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValidationOptions").field("seed", &self.seed).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] check {:>2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "special functions",
        2 => "coupon collector pmf",
        3 => "depth-1 exactness",
        4 => "approximation accuracy",
        5 => "greedy guarantee",
        6 => "asymptotic expansions",
        7 => "asymptotic optima",
        8 => "coded dominates uncoded",
        9 => "large-network ordering",
        10 => "density and truncation",
        _ => "unknown",
    }
}

/// Runs one check; internal errors count as a failure.
pub fn run_check(id: u8, opts: &ValidationOptions) -> CheckReport {
    let start = Instant::now();
    let outcome = match id {
        1 => check_special(opts),
        2 => check_coupon(opts),
        3 => check_depth_one(opts),
        4 => check_approximation(opts),
        5 => check_greedy(opts),
        6 => check_expansions(opts),
        7 => check_optima(opts),
        8 => check_dominance(opts),
        9 => check_large_network(opts),
        10 => check_density(opts),
        _ => Ok((false, format!("no check with id {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckReport { id, title: title(id), passed, detail, elapsed: start.elapsed() }
}

pub fn run_all(opts: &ValidationOptions) -> Vec<CheckReport> {
    CHECK_IDS.iter().map(|&id| run_check(id, opts)).collect()
}

type Outcome = Result<(bool, String)>;

/// The small reference network: 5 files, 2 cache slots, 3 SIC stages,
/// alpha 4, W = 10 MHz, T = 1 ms, Zipf(1) requests.
pub fn reference_config(normalized_file_size: f64) -> Result<SystemConfig> {
    reference_params(5, 2, 3, normalized_file_size)
}

fn reference_params(n: u32, k: u32, m: u32, normalized_file_size: f64) -> Result<SystemConfig> {
    SystemConfig::new(SystemParams {
        n_files: n,
        cache_size: k,
        sic_capability: m,
        path_loss_exp: 4.0,
        bandwidth_hz: 10e6,
        slot_duration_s: 1e-3,
        file_size_bits: normalized_file_size * 10e6 * 1e-3,
        bs_density: 1e-4,
    })
}

fn rng_for(opts: &ValidationOptions, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(salt);
    rng
}

fn check_special(opts: &ValidationOptions) -> Outcome {
    let b = special::beta(0.5, 0.5)?;
    let bc = special::beta_complement(0.5, 0.5, 0.5f64.sqrt())?;
    let closed = PI - 2.0 * 2f64.powf(-0.25).asin();
    let mut ok = (b - PI).abs() <= 1e-10 && (bc - closed).abs() <= 1e-10;
    let mut worst = 0.0f64;
    let mut rng = rng_for(opts, 1);
    for _ in 0..100 {
        let x = rng.random_range(0.1..0.9);
        let y = rng.random_range(0.1..0.9);
        let z = rng.random_range(0.0..1.0);
        let gap = (special::beta_complement(x, y, z)? + special::beta_lower(x, y, z)? - special::beta(x, y)?).abs();
        worst = worst.max(gap);
    }
    ok &= worst <= 1e-10;
    Ok((ok, format!("|B(1/2,1/2)-pi| = {:.1e}, |B'-closed| = {:.1e}, worst additivity gap {worst:.1e}", (b - PI).abs(), (bc - closed).abs())))
}

/// Probability that the `i`-th of `i` uniform draws from `code` labels is the
/// first to complete the set, by listing every sequence.
pub fn enumerate_completion(code: u32, i: u32) -> f64 {
    let total = (code as u64).pow(i);
    let full = (1u64 << code) - 1;
    let mut hits = 0u64;
    for mut seq in 0..total {
        let mut seen = 0u64;
        let mut first = None;
        for step in 1..=i {
            seen |= 1 << (seq % code as u64);
            seq /= code as u64;
            if seen == full {
                first = Some(step);
                break;
            }
        }
        if first == Some(i) {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

fn check_coupon(opts: &ValidationOptions) -> Outcome {
    let mut worst = 0.0f64;
    for code in 2..=4u32 {
        for i in 1..=8u32 {
            worst = worst.max(((opts.coupon_pmf)(code, i) - enumerate_completion(code, i)).abs());
        }
    }
    Ok((worst <= 1e-12, format!("worst gap to enumeration {worst:.1e} over codes 2..=4, i <= 8")))
}

const FILE_SIZE_GRID: [f64; 3] = [0.5, 1.0, 2.0];
const MC_TRIALS: u64 = 100_000;

fn check_depth_one(opts: &ValidationOptions) -> Outcome {
    let a = Popularity::zipf(5, 1.0)?;
    let alloc = RlncAllocation::new(vec![1, 1, 0, 0, 0]);
    let cases = FILE_SIZE_GRID
        .iter()
        .map(|&r| Ok(SimCase { design: SimDesign::Rlnc(alloc.clone()), cfg: reference_config(r)? }))
        .collect::<Result<Vec<_>>>()?;
    let reports = simulate_cases(&cases, &a, &SimOptions::new(MC_TRIALS, opts.seed))?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (case, rep) in cases.iter().zip(&reports) {
        let exact = stp_rlnc(&alloc, &a, &case.cfg)?.total;
        let gap = (exact - rep.overall.mean).abs();
        ok &= gap <= rep.overall.ci_half_width;
        parts.push(format!("S/WT={}: |{exact:.4}-{:.4}| = {gap:.4} vs ci {:.4}", case.cfg.normalized_file_size(), rep.overall.mean, rep.overall.ci_half_width));
    }
    Ok((ok, parts.join("; ")))
}

/// Partitioned allocations for the reference network.
pub fn partitioned_allocations() -> Vec<Vec<u32>> {
    vec![vec![2, 2, 2, 2, 0], vec![3, 3, 3, 2, 2], vec![1, 2, 2, 0, 0]]
}

fn check_approximation(opts: &ValidationOptions) -> Outcome {
    let a = Popularity::zipf(5, 1.0)?;
    let mut cases = Vec::new();
    for &r in &FILE_SIZE_GRID {
        let cfg = reference_config(r)?;
        for codes in partitioned_allocations() {
            cases.push(SimCase { design: SimDesign::Rlnc(RlncAllocation::new(codes.clone())), cfg });
            let serve = default_serve_counts(&codes, cfg.sic_capability());
            cases.push(SimCase { design: SimDesign::Uc(UcAllocation::new(codes, serve)), cfg });
        }
    }
    let reports = simulate_cases(&cases, &a, &SimOptions::new(MC_TRIALS, opts.seed))?;
    let mut worst = (0.0f64, String::new());
    for (case, rep) in cases.iter().zip(&reports) {
        let (exact, label) = match &case.design {
            SimDesign::Rlnc(x) => (stp_rlnc(x, &a, &case.cfg)?.total, format!("rlnc {:?}", x.codes())),
            SimDesign::Uc(x) => (stp_uc(x, &a, &case.cfg)?.total, format!("uc {:?}", x.codes())),
            SimDesign::Baseline(_) => unreachable!(),
        };
        let gap = (exact - rep.overall.mean).abs();
        if gap >= worst.0 {
            worst = (gap, format!("{label} at S/WT={}", case.cfg.normalized_file_size()));
        }
    }
    Ok((worst.0 <= 0.05, format!("{} comparisons, largest gap {:.4} ({})", cases.len(), worst.0, worst.1)))
}

/// A random small instance for optimizer checks.
pub fn random_instance<R: Rng>(rng: &mut R) -> Result<(Popularity, SystemConfig)> {
    let n = rng.random_range(2..=6u32);
    let k = rng.random_range(1..=3u32.min(n - 1));
    let m = rng.random_range(1..=4u32);
    let gamma = [0.6, 1.0, 1.4][rng.random_range(0..3)];
    let ratio = (rng.random_range(0.05f64.ln()..10f64.ln())).exp();
    Ok((Popularity::zipf(n as usize, gamma)?, reference_params(n, k, m, ratio)?))
}

fn check_greedy(opts: &ValidationOptions) -> Outcome {
    let mut rng = rng_for(opts, 5);
    let mut worst = f64::INFINITY;
    let mut below = 0;
    let mut comparisons = 0;
    for _ in 0..200 {
        let (a, cfg) = random_instance(&mut rng)?;
        for kind in [Design::Rlnc, Design::Uc] {
            let inst = optimize::build_mckp(kind, &a, &cfg)?;
            let g = optimize::greedy_mckp(&inst)?.value;
            let e = optimize::exhaustive_mckp(&inst, optimize::DEFAULT_EXHAUSTIVE_BUDGET)?.value;
            let ratio = if e > 0.0 { g / e } else { 1.0 };
            worst = worst.min(ratio);
            if g < 0.5 * e {
                below += 1;
            }
            comparisons += 1;
        }
    }
    Ok((below == 0, format!("{comparisons} comparisons, {below} below one half, minimum ratio {worst:.6}")))
}

fn check_expansions(_opts: &ValidationOptions) -> Outcome {
    let a = Popularity::zipf(5, 1.0)?;
    let small = reference_config(1e-3)?;
    let large = reference_config(30.0)?;
    let allocations = [vec![1, 1, 0, 0, 0], vec![2, 2, 2, 2, 0], vec![3, 3, 3, 3, 3]];
    let mut worst_small = 0.0f64;
    let mut worst_large = 0.0f64;
    for codes in &allocations {
        let rl = RlncAllocation::new(codes.clone());
        let uc = UcAllocation::new(codes.clone(), default_serve_counts(codes, 3));
        let r0 = stp_rlnc(&rl, &a, &small)?.total / analysis::stp_rlnc_small_s(&rl, &a, &small)?;
        let u0 = stp_uc(&uc, &a, &small)?.total / analysis::stp_uc_small_s(&uc, &a, &small)?;
        let ri = stp_rlnc(&rl, &a, &large)?.total / analysis::stp_rlnc_large_s(&rl, &a, &large)?;
        let ui = stp_uc(&uc, &a, &large)?.total / analysis::stp_uc_large_s(&uc, &a, &large)?;
        worst_small = worst_small.max((r0 - 1.0).abs()).max((u0 - 1.0).abs());
        worst_large = worst_large.max((ri - 1.0).abs()).max((ui - 1.0).abs());
    }
    Ok((
        worst_small <= 1e-3 && worst_large <= 2e-2,
        format!("worst |q/q0 - 1| = {worst_small:.2e} at S/WT=1e-3, worst |q/qinf - 1| = {worst_large:.2e} at S/WT=30"),
    ))
}

fn check_optima(_opts: &ValidationOptions) -> Outcome {
    let a = Popularity::zipf(5, 1.0)?;
    let small = reference_params(5, 2, 2, 1e-3)?;
    let large = reference_params(5, 2, 2, 30.0)?;
    let ex_small = optimize::solve_rlnc(&a, &small, Method::Exhaustive)?;
    let asym_small = optimize::asymptotic_opt_rlnc_small(&a, &small)?;
    let ex_large_r = optimize::solve_rlnc(&a, &large, Method::Exhaustive)?;
    let ex_large_u = optimize::solve_uc(&a, &large, Method::Exhaustive)?;
    let asym_large_r = optimize::asymptotic_opt_rlnc_large(&a, &large)?;
    let asym_large_u = optimize::asymptotic_opt_uc_large(&a, &large)?;
    let ok = ex_small.allocation.codes() == [2, 2, 2, 2, 0]
        && asym_small.allocation.codes() == ex_small.allocation.codes()
        && ex_large_r.allocation.codes() == [1, 1, 0, 0, 0]
        && ex_large_u.allocation.codes() == [1, 1, 0, 0, 0]
        && asym_large_r.allocation.codes() == ex_large_r.allocation.codes()
        && asym_large_u.allocation.codes() == ex_large_u.allocation.codes();
    Ok((
        ok,
        format!(
            "small: exhaustive {:?}; large: rlnc {:?}, uc {:?}",
            ex_small.allocation.codes(),
            ex_large_r.allocation.codes(),
            ex_large_u.allocation.codes()
        ),
    ))
}

/// A random feasible allocation with admissible serve counts; with
/// `whole_only` every cached file is stored entire.
pub fn random_feasible<R: Rng>(rng: &mut R, cfg: &SystemConfig, whole_only: bool) -> (Vec<u32>, Vec<u32>) {
    let n = cfg.n_files();
    let m = cfg.sic_capability();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut codes = vec![0u32; n];
    let mut room = num_rational::Ratio::from_integer(cfg.cache_size() as u128);
    for idx in order {
        let c = if whole_only { rng.random_range(0..=1) } else { rng.random_range(0..=m) };
        if c == 0 {
            continue;
        }
        let w = num_rational::Ratio::new(1u128, c as u128);
        if w <= room {
            room -= w;
            codes[idx] = c;
        }
    }
    let serve = codes
        .iter()
        .map(|&c| match c {
            0 => 0,
            1 => 1,
            c => rng.random_range(c..=m),
        })
        .collect();
    (codes, serve)
}

fn check_dominance(opts: &ValidationOptions) -> Outcome {
    let mut rng = rng_for(opts, 8);
    let mut violations = 0;
    let mut equality_misses = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for trial in 0..500 {
        let n = rng.random_range(2..=8u32);
        let k = rng.random_range(1..n);
        let m = rng.random_range(1..=5u32);
        let ratio = rng.random_range(1e-3f64.ln()..30f64.ln()).exp();
        let cfg = reference_params(n, k, m, ratio)?;
        let a = Popularity::zipf(n as usize, rng.random_range(0.3..2.0))?;
        let whole = trial % 5 == 0;
        let (codes, serve) = random_feasible(&mut rng, &cfg, whole);
        let r = stp_rlnc(&RlncAllocation::new(codes.clone()), &a, &cfg)?.total;
        let u = stp_uc(&UcAllocation::new(codes.clone(), serve), &a, &cfg)?.total;
        worst_excess = worst_excess.max(u - r);
        if u > r + 1e-12 {
            violations += 1;
        }
        if codes.iter().all(|&c| c <= 1) && (u - r).abs() > 1e-12 {
            equality_misses += 1;
        }
    }
    Ok((
        violations == 0 && equality_misses == 0,
        format!("500 pairs, {violations} with uncoded above coded, {equality_misses} whole-file mismatches, max(uc - rlnc) = {worst_excess:.1e}"),
    ))
}

/// The large network of the comparison figure: 1000 files, 200 cache slots,
/// alpha 4, W = 10 MHz, T = 1 ms, 2000-bit files.
pub fn large_network(sic_capability: u32) -> Result<SystemConfig> {
    SystemConfig::new(SystemParams {
        n_files: 1000,
        cache_size: 200,
        sic_capability,
        path_loss_exp: 4.0,
        bandwidth_hz: 10e6,
        slot_duration_s: 1e-3,
        file_size_bits: 2e3,
        bs_density: 1e-4,
    })
}

fn check_large_network(opts: &ValidationOptions) -> Outcome {
    let a = Popularity::zipf(1000, 1.0)?;
    let cfg = large_network(5)?;
    let rlnc = optimize::solve_rlnc(&a, &cfg, Method::Greedy)?.objective;
    let uc = optimize::solve_uc(&a, &cfg, Method::Greedy)?.objective;
    let baselines = [Baseline::MostPopular, Baseline::Uniform, Baseline::WaterFill];
    let mut per_m: Vec<Vec<McEstimate>> = Vec::new();
    for m in 1..=5u32 {
        let cfg_m = large_network(m)?;
        let cases: Vec<SimCase> =
            baselines.iter().map(|&b| SimCase { design: SimDesign::Baseline(b), cfg: cfg_m }).collect();
        let seed = opts.seed.wrapping_add(m as u64);
        let reports = simulate_cases(&cases, &a, &SimOptions::new(10_000, seed))?;
        per_m.push(reports.into_iter().map(|r| r.overall).collect());
    }
    let at_five = &per_m[4];
    let mut ok = rlnc >= uc;
    for e in at_five {
        ok &= uc >= e.upper();
    }
    let mut drift = 0.0f64;
    for row in &per_m[1..] {
        for (e, e1) in row.iter().zip(&per_m[0]) {
            let gap = (e.mean - e1.mean).abs();
            ok &= gap <= e.ci_half_width + e1.ci_half_width;
            drift = drift.max(gap / (e.ci_half_width + e1.ci_half_width));
        }
    }
    let shown: Vec<String> = at_five.iter().map(|e| format!("{:.4}+-{:.4}", e.mean, e.ci_half_width)).collect();
    Ok((
        ok,
        format!(
            "rlnc {rlnc:.4} >= uc {uc:.4} >= baselines [{}]; baseline drift over M at most {drift:.2} of combined ci",
            shown.join(", ")
        ),
    ))
}

fn check_density(opts: &ValidationOptions) -> Outcome {
    let a = Popularity::zipf(5, 1.0)?;
    let cfg = reference_config(1.0)?;
    let dense = cfg.with_bs_density(4.0 * cfg.bs_density())?;
    let design = SimDesign::Rlnc(RlncAllocation::new(vec![2, 2, 2, 2, 0]));
    let run = |cfg: SystemConfig, opts: SimOptions| -> Result<McEstimate> {
        Ok(simulate_cases(&[SimCase { design: design.clone(), cfg }], &a, &opts)?[0].overall)
    };
    let sparse_est = run(cfg, SimOptions::new(MC_TRIALS, opts.seed))?;
    let dense_est = run(dense, SimOptions::new(MC_TRIALS, opts.seed.wrapping_add(1)))?;
    let density_gap = (sparse_est.mean - dense_est.mean).abs();
    let density_ok = density_gap <= sparse_est.ci_half_width + dense_est.ci_half_width;

    let trials = 50_000;
    let rule = TruncationRule::for_path_loss(cfg.path_loss_exp());
    let base = run(cfg, SimOptions { trials, seed: opts.seed, truncation: Some(rule) })?;
    let wide = run(cfg, SimOptions { trials, seed: opts.seed, truncation: Some(rule.scaled(2.0)) })?;
    let shift = (base.mean - wide.mean).abs();
    let trunc_ok = shift < 0.25 * base.ci_half_width;
    Ok((
        density_ok && trunc_ok,
        format!(
            "density: {:.4} vs {:.4} (gap {density_gap:.4}, combined ci {:.4}); doubled radius shift {shift:.5} vs 0.25 ci {:.5}",
            sparse_est.mean,
            dense_est.mean,
            sparse_est.ci_half_width + dense_est.ci_half_width,
            0.25 * base.ci_half_width
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_small_cases() {
        assert_eq!(enumerate_completion(2, 2), 0.5);
        assert_eq!(enumerate_completion(2, 3), 0.25);
        assert!((enumerate_completion(3, 3) - 6.0 / 27.0).abs() < 1e-15);
        assert_eq!(enumerate_completion(3, 2), 0.0);
    }

    #[test]
    fn random_allocations_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (_, cfg) = random_instance(&mut rng).unwrap();
            let (codes, serve) = random_feasible(&mut rng, &cfg, false);
            crate::model::validate_uc(&UcAllocation::new(codes, serve), &cfg).unwrap();
        }
    }

    #[test]
    fn fast_checks_pass() {
        let opts = ValidationOptions::default();
        for id in [1, 2, 6, 7, 8] {
            let r = run_check(id, &opts);
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn planted_pmf_fault_is_caught() {
        fn off_by_one(code: u32, i: u32) -> f64 {
            analysis::coupon_pmf(code, i + 1)
        }
        let opts = ValidationOptions { coupon_pmf: off_by_one, ..Default::default() };
        assert!(!run_check(2, &opts).passed);
        assert!(!run_check(11, &opts).passed);
    }
}
