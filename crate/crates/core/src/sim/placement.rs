//! Whole-file random caching used by the reference schemes, and uncoded
//! subfile collection.

use crate::error::{Error, Result};
use crate::model::Popularity;

/// Reference placements that store entire files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    /// Every BS stores the `K` most popular files.
    MostPopular,
    /// Each file is cached with probability `K/N`.
    Uniform,
    /// Caching probabilities `min(a_n K + mu, 1)` summing to `K`.
    WaterFill,
}

impl Baseline {
    pub fn id(self) -> u8 {
        match self {
            Baseline::MostPopular => 1,
            Baseline::Uniform => 2,
            Baseline::WaterFill => 3,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Baseline::MostPopular),
            2 => Ok(Baseline::Uniform),
            3 => Ok(Baseline::WaterFill),
            other => Err(Error::param("baseline", format!("unknown baseline {other}, expected 1, 2 or 3"))),
        }
    }

    /// Per-file caching probabilities.
    pub fn caching_probs(self, a: &Popularity, cache_size: u32) -> Result<Vec<f64>> {
        let n = a.len();
        let k = cache_size as usize;
        if k >= n || k == 0 {
            return Err(Error::param("cache_size", format!("must lie in 1..{n}")));
        }
        Ok(match self {
            Baseline::MostPopular => (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect(),
            Baseline::Uniform => vec![k as f64 / n as f64; n],
            Baseline::WaterFill => water_fill_mu(a, cache_size)?.1,
        })
    }
}

/// `mu` with `sum_n min(a_n K + mu, 1) = K`, and the resulting probabilities.
pub fn water_fill_mu(a: &Popularity, cache_size: u32) -> Result<(f64, Vec<f64>)> {
    let k = cache_size as f64;
    if cache_size == 0 || cache_size as usize >= a.len() {
        return Err(Error::param("cache_size", format!("must lie in 1..{}", a.len())));
    }
    let fill = |mu: f64| a.probs().iter().map(|&p| (p * k + mu).min(1.0)).sum::<f64>();
    let mu = if fill(0.0) >= k - 1e-12 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if fill(mid) < k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let t = a.probs().iter().map(|&p| (p * k + mu).min(1.0)).collect();
    Ok((mu, t))
}

/// Strips `[L_n, L_n + T_n)` laid end to end over `[0, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripLayout {
    starts: Vec<f64>,
    probs: Vec<f64>,
    cache_size: u32,
}

impl StripLayout {
    pub fn new(probs: Vec<f64>, cache_size: u32) -> Self {
        let mut starts = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &t in &probs {
            starts.push(acc);
            acc += t;
        }
        StripLayout { starts, probs, cache_size }
    }

    pub fn probs_of(&self, n: usize) -> f64 {
        self.probs[n]
    }

    /// Whether file `n` is among the `K` files hit by `u, u+1, ..., u+K-1`.
    #[inline]
    pub fn caches(&self, n: usize, u: f64) -> bool {
        let t = self.probs[n];
        if t >= 1.0 {
            return true;
        }
        if t <= 0.0 {
            return false;
        }
        let start = self.starts[n];
        let j = (start - u).ceil().max(0.0);
        j <= (self.cache_size - 1) as f64 && u + j < start + t
    }

    /// Files stored by a BS with offset `u`.
    pub fn placement(&self, u: f64) -> Vec<usize> {
        (0..self.probs.len()).filter(|&n| self.caches(n, u)).collect()
    }
}

/// Number of BSs, nearest first, needed before `subfiles` contains all of
/// `0..code`; `None` if they never do.
pub fn first_completion_index(subfiles: &[u32], code: u32) -> Option<u32> {
    let full: u64 = if code == 64 { u64::MAX } else { (1u64 << code) - 1 };
    let mut seen = 0u64;
    for (i, &s) in subfiles.iter().enumerate() {
        seen |= 1 << s;
        if seen == full {
            return Some(i as u32 + 1);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn water_fill_examples() {
        let a = Popularity::new(vec![0.5, 0.3, 0.2]).unwrap();
        let (mu, t) = water_fill_mu(&a, 2).unwrap();
        assert_eq!(mu, 0.0);
        for (x, y) in t.iter().zip([1.0, 0.6, 0.4]) {
            assert!((x - y).abs() < 1e-12);
        }
        let a = Popularity::new(vec![0.7, 0.2, 0.1]).unwrap();
        let (mu, t) = water_fill_mu(&a, 2).unwrap();
        assert!((mu - 0.2).abs() < 1e-10);
        for (x, y) in t.iter().zip([1.0, 0.6, 0.4]) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!((t.iter().sum::<f64>() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn water_fill_never_saturates_everything() {
        for gamma in [0.4, 1.0, 2.5] {
            let a = Popularity::zipf(20, gamma).unwrap();
            for k in 1..20 {
                let (_, t) = water_fill_mu(&a, k).unwrap();
                assert!((t.iter().sum::<f64>() - k as f64).abs() < 1e-10);
                assert!(t.iter().any(|&x| x < 1.0));
            }
        }
    }

    #[test]
    fn strips_store_exactly_k_files() {
        let layout = StripLayout::new(vec![1.0, 0.6, 0.4], 2);
        for i in 0..1000 {
            let u = i as f64 / 1000.0;
            let p = layout.placement(u);
            assert_eq!(p.len(), 2, "u = {u}");
            assert!(p.contains(&0));
        }
        let a = Popularity::zipf(10, 0.8).unwrap();
        let t = water_fill_mu(&a, 3).unwrap().1;
        let layout = StripLayout::new(t.clone(), 3);
        let mut hits = vec![0usize; 10];
        let steps = 100_000;
        for i in 0..steps {
            let p = layout.placement((i as f64 + 0.5) / steps as f64);
            assert_eq!(p.len(), 3);
            for n in p {
                hits[n] += 1;
            }
        }
        for (h, want) in hits.iter().zip(&t) {
            assert!((*h as f64 / steps as f64 - want).abs() < 1e-4);
        }
    }

    #[test]
    fn caching_probs() {
        let a = Popularity::zipf(5, 1.0).unwrap();
        assert_eq!(Baseline::MostPopular.caching_probs(&a, 2).unwrap(), vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(Baseline::Uniform.caching_probs(&a, 2).unwrap(), vec![0.4; 5]);
        assert!(Baseline::from_id(4).is_err());
        for b in [Baseline::MostPopular, Baseline::Uniform, Baseline::WaterFill] {
            assert_eq!(Baseline::from_id(b.id()).unwrap(), b);
        }
    }

    #[test]
    fn completion_index() {
        assert_eq!(first_completion_index(&[0], 1), Some(1));
        assert_eq!(first_completion_index(&[1, 1, 0], 2), Some(3));
        assert_eq!(first_completion_index(&[1, 1, 1], 2), None);
        assert_eq!(first_completion_index(&[2, 0, 2, 1, 0], 3), Some(4));
    }
}
