//! Monte Carlo estimates of the success probability over random networks.
//!
//! Every trial draws a fresh network, a request and (for uncoded designs and
//! random baselines) a placement. Trial `t` reads four independent ChaCha8
//! streams of the user seed: network `4t`, request `4t+1`, uncoded subfiles
//! `4t+2` and baseline strip offsets `4t+3`. Results therefore depend only on
//! the inputs and the seed, not on threads, and different designs simulated
//! with the same seed see the same networks.

mod network;
mod placement;

pub use network::{sample_network, sic_decode_chain, NetworkRealization, TruncationRule, MAX_EXPECTED_BS};
pub use placement::{first_completion_index, water_fill_mu, Baseline, StripLayout};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{validate_rlnc, validate_uc, Popularity, RlncAllocation, SystemConfig, UcAllocation};
use network::{sir_threshold, ArrivalStream, PowerLaw};

pub const DEFAULT_TRIALS: u64 = 100_000;

const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub trials: u64,
    pub seed: u64,
    /// Disc size; `None` picks [`TruncationRule::for_path_loss`].
    pub truncation: Option<TruncationRule>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { trials: DEFAULT_TRIALS, seed: 0, truncation: None }
    }
}

impl SimOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimOptions { trials, seed, truncation: None }
    }
}

/// Sample proportion with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub ci_half_width: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// With zero trials the mean is reported as 0 with a zero half-width.
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        if trials == 0 {
            return McEstimate { mean: 0.0, ci_half_width: 0.0, trials, seed };
        }
        let mean = successes as f64 / trials as f64;
        let ci_half_width = 1.96 * (mean * (1.0 - mean) / trials as f64).sqrt();
        McEstimate { mean, ci_half_width, trials, seed }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci_half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_half_width
    }
}

/// Overall estimate plus one estimate per file, conditioned on that file
/// being requested.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub overall: McEstimate,
    pub per_file: Vec<McEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimDesign {
    Rlnc(RlncAllocation),
    Uc(UcAllocation),
    Baseline(Baseline),
}

/// A design under one system configuration. Cases simulated together must
/// agree on everything except file size, cache size and SIC capability.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCase {
    pub design: SimDesign,
    pub cfg: SystemConfig,
}

pub fn simulate_rlnc(alloc: &RlncAllocation, a: &Popularity, cfg: &SystemConfig, opts: &SimOptions) -> Result<SimReport> {
    one(SimDesign::Rlnc(alloc.clone()), a, cfg, opts)
}

pub fn simulate_uc(alloc: &UcAllocation, a: &Popularity, cfg: &SystemConfig, opts: &SimOptions) -> Result<SimReport> {
    one(SimDesign::Uc(alloc.clone()), a, cfg, opts)
}

pub fn simulate_baseline(which: Baseline, a: &Popularity, cfg: &SystemConfig, opts: &SimOptions) -> Result<SimReport> {
    one(SimDesign::Baseline(which), a, cfg, opts)
}

fn one(design: SimDesign, a: &Popularity, cfg: &SystemConfig, opts: &SimOptions) -> Result<SimReport> {
    let mut out = simulate_cases(&[SimCase { design, cfg: *cfg }], a, opts)?;
    Ok(out.pop().expect("one case in, one report out"))
}

enum Plan {
    Rlnc { codes: Vec<u32>, tau: Vec<f64> },
    Uc { codes: Vec<u32>, serve: Vec<u32>, tau: Vec<f64> },
    MostPopular { cache_size: usize, tau: f64 },
    Strip { layout: StripLayout, tau: f64 },
}

fn thresholds(cfg: &SystemConfig) -> Vec<f64> {
    // index = code; entry 0 unused
    std::iter::once(f64::NAN).chain((1..=cfg.sic_capability()).map(|c| sir_threshold(c, cfg))).collect()
}

fn plan(case: &SimCase, a: &Popularity) -> Result<Plan> {
    let cfg = &case.cfg;
    a.check_len(cfg)?;
    Ok(match &case.design {
        SimDesign::Rlnc(x) => {
            validate_rlnc(x, cfg)?;
            Plan::Rlnc { codes: x.codes().to_vec(), tau: thresholds(cfg) }
        }
        SimDesign::Uc(x) => {
            validate_uc(x, cfg)?;
            Plan::Uc { codes: x.codes().to_vec(), serve: x.serve_counts().to_vec(), tau: thresholds(cfg) }
        }
        SimDesign::Baseline(Baseline::MostPopular) => {
            Plan::MostPopular { cache_size: cfg.cache_size() as usize, tau: sir_threshold(1, cfg) }
        }
        SimDesign::Baseline(b) => Plan::Strip {
            layout: StripLayout::new(b.caching_probs(a, cfg.cache_size())?, cfg.cache_size()),
            tau: sir_threshold(1, cfg),
        },
    })
}

struct Counts {
    requests: Vec<u64>,
    successes: Vec<Vec<u64>>,
}

impl Counts {
    fn new(cases: usize, files: usize) -> Self {
        Counts { requests: vec![0; files], successes: vec![vec![0; files]; cases] }
    }

    fn merge(mut self, other: Counts) -> Counts {
        for (x, y) in self.requests.iter_mut().zip(other.requests) {
            *x += y;
        }
        for (xs, ys) in self.successes.iter_mut().zip(other.successes) {
            for (x, y) in xs.iter_mut().zip(ys) {
                *x += y;
            }
        }
        self
    }
}

struct Engine {
    plans: Vec<Plan>,
    cumulative: Vec<f64>,
    power: PowerLaw,
    rule: TruncationRule,
    depth: usize,
    subfile_draws: usize,
    base: ChaCha8Rng,
    seed: u64,
}

fn stream(base: &ChaCha8Rng, id: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(id);
    rng
}

/// Per-trial scratch space.
struct Scratch {
    near: Vec<f64>,
    interference: Vec<f64>,
    subfile_u: Vec<f64>,
    served: Vec<Option<f64>>,
}

impl Engine {
    fn run_chunk(&self, lo: u64, hi: u64) -> Result<Counts> {
        let mut counts = Counts::new(self.plans.len(), self.cumulative.len());
        let mut s = Scratch {
            near: Vec::with_capacity(self.depth),
            interference: vec![0.0; self.depth],
            subfile_u: Vec::with_capacity(self.subfile_draws),
            served: vec![None; self.plans.len()],
        };
        for t in lo..hi {
            self.trial(t, &mut s, &mut counts)?;
        }
        Ok(counts)
    }

    fn trial(&self, t: u64, s: &mut Scratch, counts: &mut Counts) -> Result<()> {
        let mut net_rng = stream(&self.base, 4 * t);
        let mut req_rng = stream(&self.base, 4 * t + 1);
        let mut sub_rng = stream(&self.base, 4 * t + 2);
        let mut off_rng = stream(&self.base, 4 * t + 3);

        let u: f64 = req_rng.random();
        let n = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        counts.requests[n] += 1;

        s.subfile_u.clear();
        s.subfile_u.extend((0..self.subfile_draws).map(|_| sub_rng.random::<f64>()));

        // Which random-placement plans still look for a BS holding file n.
        let mut pending = 0usize;
        for (slot, p) in s.served.iter_mut().zip(&self.plans) {
            *slot = None;
            if let Plan::Strip { layout, .. } = p {
                if layout.probs_of(n) > 0.0 {
                    pending += 1;
                }
            }
        }

        s.near.clear();
        let mut far = 0.0;
        let mut total = 0.0;
        let mut count = 0usize;
        let mut arrivals = ArrivalStream::new(self.rule);
        while let Some((gamma, h)) = arrivals.next(&mut net_rng) {
            let p = self.power.power(gamma, h);
            if count < self.depth {
                s.near.push(p);
            } else {
                far += p;
            }
            total += p;
            if pending > 0 {
                let offset: f64 = off_rng.random();
                for (slot, plan) in s.served.iter_mut().zip(&self.plans) {
                    if let (None, Plan::Strip { layout, .. }) = (&slot, plan) {
                        if layout.caches(n, offset) {
                            *slot = Some(p);
                            pending -= 1;
                        }
                    }
                }
            }
            count += 1;
        }
        if count < self.depth {
            return Err(Error::InsufficientBaseStations { found: count, needed: self.depth });
        }
        let mut rest = far;
        for j in (0..self.depth).rev() {
            s.interference[j] = rest;
            rest += s.near[j];
        }
        let chain = |depth: u32, tau: f64| {
            tau == 0.0 || (0..depth as usize).all(|j| s.near[j] > tau * s.interference[j])
        };

        for (k, plan) in self.plans.iter().enumerate() {
            let ok = match plan {
                Plan::Rlnc { codes, tau } => {
                    let c = codes[n];
                    c > 0 && chain(c, tau[c as usize])
                }
                Plan::Uc { codes, serve, tau } => {
                    let c = codes[n];
                    c > 0 && {
                        let full = (1u64 << c) - 1;
                        let mut seen = 0u64;
                        let mut done = None;
                        for (i, &x) in s.subfile_u[..serve[n] as usize].iter().enumerate() {
                            seen |= 1 << subfile_index(x, c);
                            if seen == full {
                                done = Some(i as u32 + 1);
                                break;
                            }
                        }
                        done.is_some_and(|i| chain(i, tau[c as usize]))
                    }
                }
                Plan::MostPopular { cache_size, tau } => {
                    n < *cache_size && {
                        let p = s.near[0];
                        *tau == 0.0 || p > tau * (total - p)
                    }
                }
                Plan::Strip { tau, .. } => match s.served[k] {
                    Some(p) => *tau == 0.0 || p > tau * (total - p),
                    None => false,
                },
            };
            if ok {
                counts.successes[k][n] += 1;
            }
        }
        Ok(())
    }
}

#[inline]
fn subfile_index(u: f64, code: u32) -> u32 {
    ((u * code as f64) as u32).min(code - 1)
}

/// Simulates several designs on shared random networks.
pub fn simulate_cases(cases: &[SimCase], a: &Popularity, opts: &SimOptions) -> Result<Vec<SimReport>> {
    let first = cases.first().ok_or_else(|| Error::param("cases", "nothing to simulate"))?;
    if opts.trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    let law = &first.cfg;
    for c in cases {
        if c.cfg.n_files() != law.n_files()
            || c.cfg.path_loss_exp() != law.path_loss_exp()
            || c.cfg.bs_density() != law.bs_density()
        {
            return Err(Error::param("cases", "simulated together but disagree on n_files, path_loss_exp or bs_density"));
        }
    }
    let rule = opts.truncation.unwrap_or_else(|| TruncationRule::for_path_loss(law.path_loss_exp()));
    rule.check()?;
    let plans = cases.iter().map(|c| plan(c, a)).collect::<Result<Vec<_>>>()?;
    let depth = cases.iter().map(|c| c.cfg.sic_capability() as usize).max().unwrap_or(1);
    let subfile_draws = plans
        .iter()
        .filter_map(|p| match p {
            Plan::Uc { serve, .. } => serve.iter().copied().max(),
            _ => None,
        })
        .max()
        .unwrap_or(0) as usize;
    let mut cumulative: Vec<f64> = a
        .probs()
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    *cumulative.last_mut().unwrap() = f64::INFINITY;

    let engine = Engine {
        plans,
        cumulative,
        power: PowerLaw::new(law),
        rule,
        depth,
        subfile_draws,
        base: ChaCha8Rng::seed_from_u64(opts.seed),
        seed: opts.seed,
    };
    let chunks = opts.trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|i| engine.run_chunk(i * CHUNK, ((i + 1) * CHUNK).min(opts.trials)))
        .try_reduce(|| Counts::new(cases.len(), a.len()), |x, y| Ok(x.merge(y)))?;

    Ok(counts
        .successes
        .iter()
        .map(|per| {
            let total: u64 = per.iter().sum();
            SimReport {
                overall: McEstimate::from_counts(total, opts.trials, engine.seed),
                per_file: per
                    .iter()
                    .zip(&counts.requests)
                    .map(|(&ok, &req)| McEstimate::from_counts(ok, req, engine.seed))
                    .collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{coupon_pmf, stp_rlnc};
    use crate::model::SystemParams;

    fn cfg(ratio: f64) -> SystemConfig {
        SystemConfig::new(SystemParams {
            n_files: 5,
            cache_size: 2,
            sic_capability: 3,
            path_loss_exp: 4.0,
            bandwidth_hz: 1e7,
            slot_duration_s: 1e-3,
            file_size_bits: ratio * 1e4,
            bs_density: 1e-4,
        })
        .unwrap()
    }

    #[test]
    fn estimate_half_width() {
        let e = McEstimate::from_counts(50, 100, 9);
        assert_eq!(e.mean, 0.5);
        assert!((e.ci_half_width - 1.96 * 0.05).abs() < 1e-15);
        assert_eq!(McEstimate::from_counts(0, 0, 0).ci_half_width, 0.0);
    }

    #[test]
    fn empty_allocation_never_succeeds() {
        let a = Popularity::zipf(5, 1.0).unwrap();
        let r = simulate_rlnc(&RlncAllocation::new(vec![0; 5]), &a, &cfg(1.0), &SimOptions::new(2000, 1)).unwrap();
        assert_eq!(r.overall.mean, 0.0);
        assert_eq!(r.per_file.iter().map(|e| e.trials).sum::<u64>(), 2000);
    }

    #[test]
    fn zero_size_cached_files_always_succeed() {
        let a = Popularity::zipf(5, 1.0).unwrap();
        let alloc = RlncAllocation::new(vec![3, 3, 3, 0, 0]);
        let r = simulate_rlnc(&alloc, &a, &cfg(0.0), &SimOptions::new(2000, 4)).unwrap();
        for (n, e) in r.per_file.iter().enumerate() {
            assert_eq!(e.mean, if n < 3 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = Popularity::zipf(5, 1.0).unwrap();
        let alloc = RlncAllocation::new(vec![1, 2, 2, 0, 0]);
        let c = cfg(1.0);
        let x = simulate_rlnc(&alloc, &a, &c, &SimOptions::new(3000, 11)).unwrap();
        let y = simulate_rlnc(&alloc, &a, &c, &SimOptions::new(3000, 11)).unwrap();
        let z = simulate_rlnc(&alloc, &a, &c, &SimOptions::new(3000, 12)).unwrap();
        assert_eq!(x, y);
        assert_ne!(x.overall.mean, z.overall.mean);
    }

    #[test]
    fn batch_matches_single_runs() {
        let a = Popularity::zipf(5, 1.0).unwrap();
        let c = cfg(0.5);
        let opts = SimOptions::new(3000, 5);
        let rl = RlncAllocation::new(vec![2, 2, 2, 2, 0]);
        let uc = UcAllocation::with_default_serve_counts(vec![2, 2, 2, 2, 0], 3);
        let cases = vec![
            SimCase { design: SimDesign::Rlnc(rl.clone()), cfg: c },
            SimCase { design: SimDesign::Uc(uc.clone()), cfg: c },
            SimCase { design: SimDesign::Baseline(Baseline::WaterFill), cfg: c },
        ];
        let batch = simulate_cases(&cases, &a, &opts).unwrap();
        assert_eq!(batch[0], simulate_rlnc(&rl, &a, &c, &opts).unwrap());
        assert_eq!(batch[1], simulate_uc(&uc, &a, &c, &opts).unwrap());
        assert_eq!(batch[2], simulate_baseline(Baseline::WaterFill, &a, &c, &opts).unwrap());
        // Uncoded success never exceeds coded success on the same trial.
        assert!(batch[1].overall.mean <= batch[0].overall.mean);
    }

    #[test]
    fn most_popular_baseline_is_whole_file_rlnc() {
        let a = Popularity::zipf(5, 1.0).unwrap();
        let c = cfg(1.0);
        let opts = SimOptions::new(4000, 2);
        let b = simulate_baseline(Baseline::MostPopular, &a, &c, &opts).unwrap();
        let r = simulate_rlnc(&RlncAllocation::new(vec![1, 1, 0, 0, 0]), &a, &c, &opts).unwrap();
        assert_eq!(b, r);
        let exact = stp_rlnc(&RlncAllocation::new(vec![1, 1, 0, 0, 0]), &a, &c).unwrap().total;
        assert!((b.overall.mean - exact).abs() < 4.0 * b.overall.ci_half_width);
    }

    #[test]
    fn subfile_draws_follow_coupon_law() {
        // The completion index of the drawn subfiles, checked by chi-square.
        let base = ChaCha8Rng::seed_from_u64(99);
        for code in [2u32, 3] {
            let draws = 20_000u64;
            let horizon = 12u32;
            let mut hist = vec![0u64; horizon as usize + 2];
            for t in 0..draws {
                let mut rng = stream(&base, 4 * t + 2);
                let d: Vec<u32> = (0..horizon).map(|_| subfile_index(rng.random(), code)).collect();
                let idx = first_completion_index(&d, code).map_or(horizon + 1, |i| i) as usize;
                hist[idx] += 1;
            }
            let mut chi2 = 0.0;
            let mut cells = 0;
            let mut tail = 1.0;
            for i in code..=horizon {
                let p = coupon_pmf(code, i);
                tail -= p;
                let e = p * draws as f64;
                if e >= 5.0 {
                    chi2 += (hist[i as usize] as f64 - e).powi(2) / e;
                    cells += 1;
                }
            }
            let e = tail * draws as f64;
            if e >= 5.0 {
                chi2 += (hist[horizon as usize + 1] as f64 - e).powi(2) / e;
                cells += 1;
            }
            // 99.9% quantile of chi-square with <= 11 dof is below 32
            assert!(chi2 < 32.0, "code {code}: chi2 = {chi2} over {cells} cells");
        }
    }

    #[test]
    fn rejects_mixed_network_laws() {
        let a = Popularity::zipf(5, 1.0).unwrap();
        let c = cfg(1.0);
        let dense = c.with_bs_density(1e-3).unwrap();
        let d = SimDesign::Baseline(Baseline::Uniform);
        let cases = vec![SimCase { design: d.clone(), cfg: c }, SimCase { design: d, cfg: dense }];
        assert!(simulate_cases(&cases, &a, &SimOptions::new(10, 0)).is_err());
        assert!(simulate_cases(&[], &a, &SimOptions::new(10, 0)).is_err());
    }
}
