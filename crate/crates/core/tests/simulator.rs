use partcache::analysis::{per_bs_decode_prob, stp_rlnc_file, stp_uc_file};
use partcache::model::{Popularity, RlncAllocation, UcAllocation};
use partcache::sim::{
    sample_network, sic_decode_chain, simulate_baseline, simulate_cases, Baseline, McEstimate, SimCase, SimDesign,
    SimOptions, StripLayout, TruncationRule,
};
use partcache::validation::reference_config;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn nearest_distance_follows_contact_law() {
    let cfg = reference_config(1.0).unwrap();
    let rule = TruncationRule::for_path_loss(cfg.path_loss_exp());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 10_000;
    let mut d1: Vec<f64> = (0..n).map(|_| sample_network(&cfg, rule, &mut rng).unwrap().bs_distances[0]).collect();
    d1.sort_by(f64::total_cmp);
    let lp = cfg.bs_density() * std::f64::consts::PI;
    let ks = d1
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-lp * x * x).exp();
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov distribution
    assert!((n as f64).sqrt() * ks < 1.628, "KS statistic {ks}");
}

#[test]
fn deeper_success_implies_shallower() {
    let cfg = reference_config(0.3).unwrap();
    let rule = TruncationRule::for_path_loss(4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let net = sample_network(&cfg, rule, &mut rng).unwrap();
        for code in 1..=3 {
            let ok: Vec<bool> = (1..=3).map(|i| sic_decode_chain(&net, code, i, &cfg).unwrap()).collect();
            assert!(ok.windows(2).all(|w| w[0] || !w[1]));
        }
    }
}

#[test]
fn depth_one_matches_closed_form() {
    let cfg = reference_config(1.0).unwrap();
    let exact = per_bs_decode_prob(1, 1, &cfg).unwrap();
    assert!((exact - 0.5601).abs() < 5e-5, "{exact}");
    let rule = TruncationRule::for_path_loss(4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 100_000u64;
    let hits = (0..trials)
        .filter(|_| sic_decode_chain(&sample_network(&cfg, rule, &mut rng).unwrap(), 1, 1, &cfg).unwrap())
        .count();
    let est = McEstimate::from_counts(hits as u64, trials, 2024);
    assert!((est.mean - exact).abs() <= est.ci_half_width, "{est:?} vs {exact}");
}

#[test]
fn two_part_files_stay_near_the_approximation() {
    let cfg = reference_config(1.0).unwrap();
    let rlnc_q = stp_rlnc_file(2, &cfg).unwrap();
    let uc_q = stp_uc_file(2, 3, &cfg).unwrap();
    // mpmath, 30 digits
    assert!((rlnc_q - 0.390_569_901_445_077_5).abs() < 1e-9, "{rlnc_q}");
    assert!((uc_q - 0.233_421_162_701_243_2).abs() < 1e-9, "{uc_q}");

    let a = Popularity::zipf(5, 1.0).unwrap();
    let codes = vec![2, 2, 2, 2, 0];
    let cases = [
        SimCase { design: SimDesign::Rlnc(RlncAllocation::new(codes.clone())), cfg },
        SimCase { design: SimDesign::Uc(UcAllocation::new(codes, vec![3, 3, 3, 3, 0])), cfg },
    ];
    let reports = simulate_cases(&cases, &a, &SimOptions::new(100_000, 5)).unwrap();
    let mass: f64 = a.probs()[..4].iter().sum();
    let rlnc_mc = reports[0].overall.mean / mass;
    let uc_mc = reports[1].overall.mean / mass;
    assert!((rlnc_mc - rlnc_q).abs() <= 0.05, "rlnc {rlnc_mc} vs {rlnc_q}");
    assert!((uc_mc - uc_q).abs() <= 0.05, "uc {uc_mc} vs {uc_q}");
    for (r, u) in reports[0].per_file.iter().zip(&reports[1].per_file) {
        assert!(u.mean <= r.mean + r.ci_half_width + u.ci_half_width, "{u:?} above {r:?}");
    }
}

#[test]
fn uniform_strips_cache_every_file_equally() {
    let (n, k) = (10usize, 3u32);
    let layout = StripLayout::new(vec![k as f64 / n as f64; n], k);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let draws = 20_000u64;
    let mut hits = vec![0u64; n];
    for _ in 0..draws {
        let stored = layout.placement(rng.random());
        assert_eq!(stored.len(), k as usize);
        for f in stored {
            hits[f] += 1;
        }
    }
    for h in hits {
        let est = McEstimate::from_counts(h, draws, 9);
        // ~2.9 sigma: a Bonferroni-style allowance for ten simultaneous files
        assert!((est.mean - 0.3).abs() <= 1.5 * est.ci_half_width, "{est:?}");
    }
}

#[test]
fn baselines_are_reproducible() {
    let cfg = reference_config(0.5).unwrap();
    let a = Popularity::zipf(5, 0.8).unwrap();
    let opts = SimOptions::new(3000, 77);
    for b in [Baseline::MostPopular, Baseline::Uniform, Baseline::WaterFill] {
        let x = simulate_baseline(b, &a, &cfg, &opts).unwrap();
        assert_eq!(x, simulate_baseline(b, &a, &cfg, &opts).unwrap());
        assert!(x.overall.mean > 0.0 && x.overall.mean < 1.0);
    }
}
