use partcache::analysis::{stp_rlnc, stp_uc};
use partcache::model::{validate_rlnc, validate_uc, Popularity, RlncAllocation, SystemConfig, SystemParams, UcAllocation};
use partcache::optimize::{
    asymptotic_opt_rlnc_large, asymptotic_opt_rlnc_small, build_mckp, exhaustive_mckp, greedy_mckp_traced, solve_rlnc,
    solve_uc, undominated_indices, Allocation, Design, Method, DEFAULT_EXHAUSTIVE_BUDGET,
};
use partcache::validation::random_instance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(n: u32, k: u32, m: u32, ratio: f64) -> SystemConfig {
    SystemConfig::new(SystemParams {
        n_files: n,
        cache_size: k,
        sic_capability: m,
        path_loss_exp: 4.0,
        bandwidth_hz: 10e6,
        slot_duration_s: 1e-3,
        file_size_bits: ratio * 1e4,
        bs_density: 1e-4,
    })
    .unwrap()
}

#[test]
fn greedy_is_legal_and_within_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let (a, cfg) = random_instance(&mut rng).unwrap();
        for design in [Design::Rlnc, Design::Uc] {
            let solve = if design == Design::Rlnc { solve_rlnc } else { solve_uc };
            let g = solve(&a, &cfg, Method::Greedy).unwrap();
            let e = solve(&a, &cfg, Method::Exhaustive).unwrap();
            assert!(g.objective >= 0.5 * e.objective - 1e-12);
            assert!(g.objective <= e.objective + 1e-12);
            worst = worst.min(g.objective / e.objective);
            for r in [&g, &e] {
                match &r.allocation {
                    Allocation::Rlnc(x) => {
                        validate_rlnc(x, &cfg).unwrap();
                        assert_eq!(stp_rlnc(x, &a, &cfg).unwrap().total, r.objective);
                    }
                    Allocation::Uc(x) => {
                        validate_uc(x, &cfg).unwrap();
                        assert_eq!(stp_uc(x, &a, &cfg).unwrap().total, r.objective);
                    }
                }
            }
        }
    }
    println!("worst greedy / exhaustive ratio {worst:.6}");
}

#[test]
fn greedy_steps_follow_the_frontier() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (a, cfg) = random_instance(&mut rng).unwrap();
        for design in [Design::Rlnc, Design::Uc] {
            let inst = build_mckp(design, &a, &cfg).unwrap();
            let frontier = undominated_indices(&inst).unwrap();
            let out = greedy_mckp_traced(&inst).unwrap();
            let accepted: Vec<_> = out.steps.iter().filter(|s| s.accepted).collect();
            for w in out.steps.windows(2) {
                assert!(w[0].slope >= w[1].slope);
            }
            let mut at = vec![inst.max_code() + 1; inst.n_classes()];
            for s in accepted {
                assert_eq!(at[s.class], s.from);
                let pos = frontier.iter().position(|&r| r == s.from).unwrap();
                assert!(pos > 0 && frontier[pos - 1] == s.to, "upgrade skipped a frontier item");
                at[s.class] = s.to;
            }
            if !out.used_split_alone {
                assert_eq!(out.selection.choice, at);
            }
        }
    }
}

#[test]
fn uncoded_never_beats_coded_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let (a, cfg) = random_instance(&mut rng).unwrap();
        let r = exhaustive_mckp(&build_mckp(Design::Rlnc, &a, &cfg).unwrap(), DEFAULT_EXHAUSTIVE_BUDGET).unwrap();
        let u = exhaustive_mckp(&build_mckp(Design::Uc, &a, &cfg).unwrap(), DEFAULT_EXHAUSTIVE_BUDGET).unwrap();
        assert!(u.value <= r.value + 1e-12);
    }
}

#[test]
fn single_stage_receiver_stores_top_files() {
    let a = Popularity::zipf(6, 0.8).unwrap();
    let cfg = config(6, 3, 1, 1.0);
    for r in [solve_rlnc(&a, &cfg, Method::Greedy).unwrap(), solve_uc(&a, &cfg, Method::Exhaustive).unwrap()] {
        assert_eq!(r.allocation.codes(), [1, 1, 1, 0, 0, 0]);
        assert!(r.certified_optimal);
    }
}

#[test]
fn tiny_files_favor_the_small_regime_allocation() {
    for (n, k, m) in [(5, 2, 2), (6, 2, 3), (6, 3, 2), (4, 1, 4)] {
        let cfg = config(n, k, m, 1e-3);
        let a = Popularity::zipf(n as usize, 1.0).unwrap();
        let e = solve_rlnc(&a, &cfg, Method::Exhaustive).unwrap();
        let s = asymptotic_opt_rlnc_small(&a, &cfg).unwrap();
        assert_eq!(e.allocation.codes(), s.allocation.codes(), "N={n} K={k} M={m}");
    }
}

#[test]
fn huge_files_favor_whole_popular_files() {
    for (n, k, m) in [(5, 2, 2), (6, 2, 3), (6, 3, 3)] {
        let cfg = config(n, k, m, 30.0);
        let a = Popularity::zipf(n as usize, 1.0).unwrap();
        let top: Vec<u32> = (0..n).map(|i| u32::from(i < k)).collect();
        assert_eq!(solve_rlnc(&a, &cfg, Method::Exhaustive).unwrap().allocation.codes(), top);
        assert_eq!(solve_uc(&a, &cfg, Method::Exhaustive).unwrap().allocation.codes(), top);
        assert_eq!(asymptotic_opt_rlnc_large(&a, &cfg).unwrap().allocation.codes(), top);
    }
}

#[test]
fn explicit_allocations_round_trip_through_objective() {
    let a = Popularity::zipf(5, 1.0).unwrap();
    let cfg = config(5, 2, 3, 1.0);
    let r = Allocation::Rlnc(RlncAllocation::new(vec![3, 3, 3, 2, 2]));
    let u = Allocation::Uc(UcAllocation::with_default_serve_counts(vec![3, 3, 3, 2, 2], 3));
    assert!(r.evaluate(&a, &cfg).unwrap() > u.evaluate(&a, &cfg).unwrap());
}
