//! Multiple-choice knapsack view of the cache-allocation problem.
//!
//! Class `n` is file `n`. Item `m <= M` stores the file as `m` parts
//! (weight `1/m`), item `M+1` skips it (weight 0, profit 0). Weights are kept
//! as integers in units of `lcm(1..=M)` so capacity checks are exact.

use std::cmp::Ordering;

use num_rational::Ratio;

use crate::analysis::ThetaTable;
use crate::error::{Error, Result};
use crate::model::{Popularity, SystemConfig, MAX_SIC_CAPABILITY};

/// Which caching design the profits describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    Rlnc,
    Uc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MckpInstance {
    /// `profits[n][m-1]` for items `m = 1..=M`; item `M+1` is implicit.
    profits: Vec<Vec<f64>>,
    max_code: u32,
    capacity: u32,
    unit: u128,
}

fn lcm_upto(m: u32) -> u128 {
    let gcd = |mut a: u128, mut b: u128| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    (1..=m as u128).fold(1, |acc, k| acc / gcd(acc, k) * k)
}

impl MckpInstance {
    /// Instance from explicit profits, one row of `M` entries per class.
    pub fn from_profits(profits: Vec<Vec<f64>>, capacity: u32) -> Result<Self> {
        let max_code = profits.first().map_or(0, |row| row.len()) as u32;
        if profits.is_empty() || max_code == 0 {
            return Err(Error::param("profits", "need at least one class with one item"));
        }
        if max_code > MAX_SIC_CAPABILITY {
            return Err(Error::param("profits", format!("at most {MAX_SIC_CAPABILITY} items per class")));
        }
        if let Some(row) = profits.iter().find(|r| r.len() != max_code as usize) {
            return Err(Error::LengthMismatch { expected: max_code as usize, got: row.len() });
        }
        if profits.iter().flatten().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::param("profits", "must be finite and nonnegative"));
        }
        if capacity == 0 {
            return Err(Error::param("capacity", "must be positive"));
        }
        Ok(MckpInstance { profits, max_code, capacity, unit: lcm_upto(max_code) })
    }

    pub fn n_classes(&self) -> usize {
        self.profits.len()
    }

    /// `M`; items are indexed `1..=M+1`.
    pub fn max_code(&self) -> u32 {
        self.max_code
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn profit(&self, class: usize, item: u32) -> f64 {
        if item > self.max_code {
            0.0
        } else {
            self.profits[class][item as usize - 1]
        }
    }

    pub fn weight(&self, item: u32) -> Ratio<u128> {
        Ratio::new(self.units(item), self.unit)
    }

    fn units(&self, item: u32) -> u128 {
        if item > self.max_code {
            0
        } else {
            self.unit / item as u128
        }
    }

    fn capacity_units(&self) -> u128 {
        self.capacity as u128 * self.unit
    }

    fn selection(&self, choice: Vec<u32>) -> MckpSelection {
        let value = choice.iter().enumerate().map(|(n, &m)| self.profit(n, m)).sum();
        let used: u128 = choice.iter().map(|&m| self.units(m)).sum();
        MckpSelection { choice, value, weight_used: Ratio::new(used, self.unit), skip_item: self.max_code + 1 }
    }
}

/// One item per class, as item indices `1..=M+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MckpSelection {
    pub choice: Vec<u32>,
    pub value: f64,
    pub weight_used: Ratio<u128>,
    skip_item: u32,
}

impl MckpSelection {
    /// Allocation codes: item `m <= M` is code `m`, the skip item is code 0.
    pub fn codes(&self) -> Vec<u32> {
        self.choice.iter().map(|&m| if m == self.skip_item { 0 } else { m }).collect()
    }
}

/// MCKP whose profits are `a_n` times the per-file success of each code.
pub fn build_mckp(kind: Design, a: &Popularity, cfg: &SystemConfig) -> Result<MckpInstance> {
    a.check_len(cfg)?;
    let m_max = cfg.sic_capability();
    let mut table = ThetaTable::new(cfg);
    let mut shape = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        shape.push(match kind {
            Design::Rlnc => table.rlnc_file(m)?,
            Design::Uc => table.uc_file(m, if m == 1 { 1 } else { m_max })?,
        });
    }
    let profits = a.probs().iter().map(|&p| shape.iter().map(|&q| p * q).collect()).collect();
    MckpInstance::from_profits(profits, cfg.cache_size())
}

const HULL_TOL: f64 = 1e-12;

fn class_frontier(inst: &MckpInstance, class: usize) -> Vec<u32> {
    // Upper concave frontier, scanning from the empty item towards weight 1.
    let skip = inst.max_code + 1;
    let mut hull: Vec<u32> = vec![skip];
    let point = |m: u32| (inst.units(m) as f64, inst.profit(class, m));
    for m in (1..=inst.max_code).rev() {
        let (w, p) = point(m);
        let (_, top) = point(*hull.last().unwrap());
        if p <= top * (1.0 + HULL_TOL) {
            continue;
        }
        while hull.len() >= 2 {
            let (w1, p1) = point(hull[hull.len() - 2]);
            let (w2, p2) = point(hull[hull.len() - 1]);
            // middle point sits on or below the chord from 1 to the new item
            let cross = (p2 - p1) * (w - w1) - (p - p1) * (w2 - w1);
            if cross <= HULL_TOL * p.abs() * (w - w1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(m);
    }
    hull.reverse();
    hull
}

/// Items that survive dominance and LP-dominance, heaviest first, ending with
/// the skip item `M+1`. Fails unless every class yields the same set.
pub fn undominated_indices(inst: &MckpInstance) -> Result<Vec<u32>> {
    let first = class_frontier(inst, 0);
    for n in 1..inst.n_classes() {
        let r = class_frontier(inst, n);
        if r != first {
            return Err(Error::UnsupportedInstance(format!(
                "class {} keeps items {:?} but class 1 keeps {:?}",
                n + 1,
                r,
                first
            )));
        }
    }
    Ok(first)
}

/// One upgrade considered by the greedy pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub class: usize,
    pub from: u32,
    pub to: u32,
    pub slope: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub selection: MckpSelection,
    pub steps: Vec<GreedyStep>,
    /// First rejected upgrade, if the pass ran out of capacity.
    pub split: Option<(usize, u32)>,
    /// True when the split item alone beat the greedy selection.
    pub used_split_alone: bool,
    /// True when the greedy selection is provably optimal (it fills the
    /// capacity exactly or never hit the capacity).
    pub certified_optimal: bool,
}

pub fn greedy_mckp(inst: &MckpInstance) -> Result<MckpSelection> {
    Ok(greedy_mckp_traced(inst)?.selection)
}

/// Greedy upgrade pass with a half-approximation guarantee.
pub fn greedy_mckp_traced(inst: &MckpInstance) -> Result<GreedyOutcome> {
    let r = undominated_indices(inst)?;
    let skip = inst.max_code + 1;

    let mut candidates = Vec::new();
    for n in 0..inst.n_classes() {
        for pair in r.windows(2) {
            let (m, lighter) = (pair[0], pair[1]);
            let dw = (inst.units(m) - inst.units(lighter)) as f64 / inst.unit as f64;
            let slope = (inst.profit(n, m) - inst.profit(n, lighter)) / dw;
            candidates.push(GreedyStep { class: n, from: lighter, to: m, slope, accepted: false });
        }
    }
    candidates.sort_by(|x, y| {
        y.slope
            .partial_cmp(&x.slope)
            .unwrap_or(Ordering::Equal)
            .then(x.class.cmp(&y.class))
            .then(x.to.cmp(&y.to))
    });

    let mut choice = vec![skip; inst.n_classes()];
    let mut used: u128 = 0;
    let cap = inst.capacity_units();
    let mut steps = Vec::new();
    let mut split = None;
    for mut step in candidates {
        debug_assert_eq!(choice[step.class], step.from, "upgrades within a class follow the frontier");
        let grown = used + inst.units(step.to) - inst.units(step.from);
        if grown <= cap {
            used = grown;
            choice[step.class] = step.to;
            step.accepted = true;
            steps.push(step);
        } else {
            split = Some((step.class, step.to));
            steps.push(step);
            break;
        }
    }

    let greedy = inst.selection(choice);
    let certified_optimal = split.is_none() || used == cap;
    if let (Some((n, m)), false) = (split, certified_optimal) {
        let mut alone = vec![skip; inst.n_classes()];
        alone[n] = m;
        let alt = inst.selection(alone);
        if alt.value > greedy.value {
            return Ok(GreedyOutcome { selection: alt, steps, split, used_split_alone: true, certified_optimal });
        }
    }
    Ok(GreedyOutcome { selection: greedy, steps, split, used_split_alone: false, certified_optimal })
}

pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 10_000_000;

/// Exact optimum by enumerating `(M+1)^N` choices, pruned by capacity.
/// Ties go to the first choice in lexicographic item order.
pub fn exhaustive_mckp(inst: &MckpInstance, budget: u64) -> Result<MckpSelection> {
    let candidates = ((inst.max_code + 1) as f64).powi(inst.n_classes() as i32);
    if candidates > budget as f64 {
        return Err(Error::BudgetExceeded { candidates, budget });
    }
    struct Search<'a> {
        inst: &'a MckpInstance,
        cap: u128,
        current: Vec<u32>,
        best: Vec<u32>,
        best_value: f64,
    }
    impl Search<'_> {
        fn go(&mut self, n: usize, used: u128, value: f64) {
            if n == self.inst.n_classes() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for m in 1..=self.inst.max_code + 1 {
                let w = used + self.inst.units(m);
                if w > self.cap {
                    continue;
                }
                self.current[n] = m;
                self.go(n + 1, w, value + self.inst.profit(n, m));
            }
        }
    }
    let skip = inst.max_code + 1;
    let mut s = Search {
        inst,
        cap: inst.capacity_units(),
        current: vec![skip; inst.n_classes()],
        best: vec![skip; inst.n_classes()],
        best_value: f64::NEG_INFINITY,
    };
    s.go(0, 0, 0.0);
    Ok(inst.selection(s.best))
}
