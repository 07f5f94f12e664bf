//! Poisson BS layouts around a typical user at the origin.
//!
//! Points are produced in distance order: with `G_k` the arrival times of a
//! unit-rate Poisson process, `d_k = sqrt(G_k / (lambda pi))` are the sorted
//! distances of a density-`lambda` PPP. Sampling stops at the disc edge
//! `G_k > c^2`, i.e. `R = c / sqrt(lambda pi)`.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::model::SystemConfig;

/// Largest mean BS count per disc we are willing to draw.
pub const MAX_EXPECTED_BS: f64 = 5e6;

/// Disc radius `R = c / sqrt(lambda pi)`, given as the factor `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRule {
    pub radius_factor: f64,
}

impl TruncationRule {
    /// Smallest `c >= 100` with at least 3000 BSs on average and a mean
    /// interference tail beyond `R` under `1e-3` of the mean interference
    /// between `1/sqrt(lambda pi)` and `R`.
    pub fn for_path_loss(alpha: f64) -> Self {
        let tail = 1001f64.powf(1.0 / (alpha - 2.0));
        TruncationRule { radius_factor: 100f64.max(3000f64.sqrt()).max(tail) }
    }

    /// Same rule with the radius multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        TruncationRule { radius_factor: self.radius_factor * factor }
    }

    pub fn expected_count(self) -> f64 {
        self.radius_factor * self.radius_factor
    }

    pub fn radius_m(self, bs_density: f64) -> f64 {
        self.radius_factor / (bs_density * std::f64::consts::PI).sqrt()
    }

    pub(crate) fn check(self) -> Result<()> {
        let expected_count = self.expected_count();
        if !(self.radius_factor > 0.0 && expected_count.is_finite()) {
            return Err(Error::param("radius_factor", "must be positive and finite"));
        }
        if expected_count > MAX_EXPECTED_BS {
            return Err(Error::TruncationTooLarge { expected_count, limit: MAX_EXPECTED_BS });
        }
        Ok(())
    }
}

/// One network draw: BSs in increasing distance with their fading gains.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub bs_distances: Vec<f64>,
    pub fading_powers: Vec<f64>,
}

impl NetworkRealization {
    pub fn len(&self) -> usize {
        self.bs_distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bs_distances.is_empty()
    }

    /// Received powers `|h_k|^2 d_k^-alpha` (unit transmit power).
    pub fn received_powers(&self, alpha: f64) -> Vec<f64> {
        self.bs_distances.iter().zip(&self.fading_powers).map(|(d, h)| h * d.powf(-alpha)).collect()
    }
}

/// Streams BSs nearest-first as `(G_k, |h_k|^2)`; two exponential draws each.
pub(crate) struct ArrivalStream {
    gamma: f64,
    limit: f64,
}

impl ArrivalStream {
    pub(crate) fn new(rule: TruncationRule) -> Self {
        ArrivalStream { gamma: 0.0, limit: rule.expected_count() }
    }

    #[inline]
    pub(crate) fn next<R: Rng>(&mut self, rng: &mut R) -> Option<(f64, f64)> {
        self.gamma += rng.sample::<f64, _>(Exp1);
        if self.gamma > self.limit {
            return None;
        }
        Some((self.gamma, rng.sample(Exp1)))
    }
}

/// Maps arrival times to received powers for a given density and path loss.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerLaw {
    inv_lambda_pi: f64,
    half_alpha: f64,
}

impl PowerLaw {
    pub(crate) fn new(cfg: &SystemConfig) -> Self {
        PowerLaw {
            inv_lambda_pi: 1.0 / (cfg.bs_density() * std::f64::consts::PI),
            half_alpha: cfg.path_loss_exp() / 2.0,
        }
    }

    /// `h d^-alpha` with `d^2 = G / (lambda pi)`.
    #[inline]
    pub(crate) fn power(&self, gamma: f64, fading: f64) -> f64 {
        let d2 = gamma * self.inv_lambda_pi;
        if self.half_alpha == 2.0 {
            fading / (d2 * d2)
        } else {
            fading * d2.powf(-self.half_alpha)
        }
    }
}

pub fn sample_network<R: Rng>(cfg: &SystemConfig, rule: TruncationRule, rng: &mut R) -> Result<NetworkRealization> {
    rule.check()?;
    let scale = 1.0 / (cfg.bs_density() * std::f64::consts::PI);
    let mut stream = ArrivalStream::new(rule);
    let mut net = NetworkRealization { bs_distances: Vec::new(), fading_powers: Vec::new() };
    while let Some((gamma, h)) = stream.next(rng) {
        net.bs_distances.push((gamma * scale).sqrt());
        net.fading_powers.push(h);
    }
    let needed = cfg.sic_capability() as usize;
    if net.len() < needed {
        return Err(Error::InsufficientBaseStations { found: net.len(), needed });
    }
    Ok(net)
}

/// SIR threshold `2^(S / (code W T)) - 1` for one subfile.
pub(crate) fn sir_threshold(code: u32, cfg: &SystemConfig) -> f64 {
    (cfg.normalized_file_size() / code as f64 * std::f64::consts::LN_2).exp_m1()
}

/// Decodes the `depth` nearest signals one after another; each must beat the
/// threshold against all farther BSs in the realization.
pub fn sic_decode_chain(net: &NetworkRealization, code: u32, depth: u32, cfg: &SystemConfig) -> Result<bool> {
    if code == 0 {
        return Err(Error::Domain("code must be at least 1".into()));
    }
    let depth = depth as usize;
    if net.len() <= depth {
        return Err(Error::InsufficientBaseStations { found: net.len(), needed: depth + 1 });
    }
    let tau = sir_threshold(code, cfg);
    if tau == 0.0 {
        return Ok(true);
    }
    let powers = net.received_powers(cfg.path_loss_exp());
    let mut rest: f64 = powers[depth..].iter().sum();
    let mut interference = vec![0.0; depth];
    for j in (0..depth).rev() {
        interference[j] = rest;
        rest += powers[j];
    }
    Ok((0..depth).all(|j| powers[j] > tau * interference[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

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
    fn truncation_defaults() {
        let r = TruncationRule::for_path_loss(4.0);
        assert_eq!(r.radius_factor, 100.0);
        assert!((r.radius_m(1e-4) - 5641.895835477563).abs() < 1e-9);
        let r = TruncationRule { radius_factor: 5000.0 * (1e-4 * std::f64::consts::PI).sqrt() };
        assert!((r.expected_count() - 7853.981633974483).abs() < 1e-6);
        assert!(TruncationRule::for_path_loss(3.0).expected_count() > 1e6);
        assert!(matches!(TruncationRule::for_path_loss(2.2).check(), Err(Error::TruncationTooLarge { .. })));
    }

    #[test]
    fn realization_is_sorted_and_reproducible() {
        let c = cfg(1.0);
        let rule = TruncationRule::for_path_loss(4.0);
        let a = sample_network(&c, rule, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_network(&c, rule, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let other = sample_network(&c, rule, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        assert!(a.bs_distances.windows(2).all(|w| w[0] < w[1]));
        assert!(a.fading_powers.iter().all(|&h| h > 0.0));
        assert!(*a.bs_distances.last().unwrap() <= rule.radius_m(1e-4));
        assert!((a.len() as f64 - 1e4).abs() < 600.0);
    }

    #[test]
    fn chain_nesting_and_zero_size() {
        let c = cfg(0.5);
        let zero = cfg(0.0);
        let rule = TruncationRule::for_path_loss(4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let net = sample_network(&c, rule, &mut rng).unwrap();
            for code in 1..=3 {
                assert!(sic_decode_chain(&net, code, 3, &zero).unwrap());
                let mut prev = true;
                for depth in 1..=4 {
                    let ok = sic_decode_chain(&net, code, depth, &c).unwrap();
                    assert!(prev || !ok);
                    prev = ok;
                }
            }
        }
    }

    #[test]
    fn too_few_stations() {
        let c = cfg(1.0);
        let tiny = TruncationRule { radius_factor: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen_error = false;
        for _ in 0..50 {
            if let Err(e) = sample_network(&c, tiny, &mut rng) {
                assert!(matches!(e, Error::InsufficientBaseStations { needed: 3, .. }));
                seen_error = true;
            }
        }
        assert!(seen_error);
    }
}
