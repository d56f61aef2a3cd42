use aggan_core::seeding;
use aggan_core::theory::{
    check_monotone, f_gen, f_upd, run_chain, AcceptanceRule, ChainConfig, ChainState, Landscape, ParentRule,
};
use proptest::prelude::*;

/// Connected graph: a cycle plus random extra edges.
fn random_landscape(values: Vec<f64>, chords: Vec<(usize, usize)>) -> Landscape {
    let n = values.len();
    let mut nb: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
    for (a, b) in chords {
        let (a, b) = (a % n, b % n);
        if a != b && !nb[a].contains(&b) {
            nb[a].push(b);
            nb[b].push(a);
        }
    }
    Landscape::new(values, nb).unwrap()
}

fn landscape_strategy() -> impl Strategy<Value = Landscape> {
    (3usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![-5.0..5.0f64, (0i32..4).prop_map(f64::from)], n),
            prop::collection::vec((0..n, 0..n), 0..n),
        )
            .prop_map(|(v, c)| random_landscape(v, c))
    })
}

fn chain_strategy() -> impl Strategy<Value = ChainConfig> {
    (
        1usize..6,
        prop_oneof![Just(1e-6), 1e-3..1e3f64],
        0.9..1.0f64,
        any::<bool>(),
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|(n, t, a, elite, greedy, seed)| ChainConfig {
            n_offspring: n,
            t_init: t,
            alpha: a,
            parent: if elite { ParentRule::Elite } else { ParentRule::Current },
            acceptance: if greedy { AcceptanceRule::Greedy } else { AcceptanceRule::Metropolis },
            budget: 300,
            seed,
            start: None,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn elite_value_never_increases(land in landscape_strategy(), cfg in chain_strategy()) {
        let traj = run_chain(&land, &cfg).unwrap();
        let check = check_monotone(&land, &traj.states);
        prop_assert!(check.monotone, "violation at {:?}", check.first_violation);
        // The elite is the best state the current chain has visited.
        let best_seen = traj.states.iter().map(|s| land.f(s.g)).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(land.f(traj.states.last().unwrap().g_b), best_seen);
    }

    #[test]
    fn offspring_is_a_neighbor(land in landscape_strategy(), cfg in chain_strategy()) {
        let mut rng = seeding::stream(cfg.seed, 0, "test");
        for s in 0..land.len() {
            let c = f_gen(&ChainState::new(s), &land, &cfg, &mut rng);
            prop_assert!(land.neighbors(s).contains(&c));
        }
    }
}

#[test]
fn best_of_n_on_a_star_follows_order_statistics() {
    // Leaves ranked 1..=k by value; the best of n uniform draws has rank r with
    // probability ((k-r+1)/k)^n - ((k-r)/k)^n.
    let k = 6;
    let leaves: Vec<f64> = vec![0.4, 0.1, 0.9, 0.3, 0.7, 0.5];
    let mut by_value: Vec<usize> = (1..=k).collect();
    by_value.sort_by(|&a, &b| leaves[a - 1].partial_cmp(&leaves[b - 1]).unwrap());
    let land = Landscape::star(2.0, &leaves).unwrap();
    let draws = 200_000;
    for n in [1usize, 2, 4] {
        let cfg = ChainConfig { n_offspring: n, ..Default::default() };
        let mut rng = seeding::stream(11, n as u64, "test/star");
        let mut counts = vec![0usize; k + 1];
        for _ in 0..draws {
            counts[f_gen(&ChainState::new(0), &land, &cfg, &mut rng)] += 1;
        }
        for (r0, &state) in by_value.iter().enumerate() {
            let r = (r0 + 1) as f64;
            let kf = k as f64;
            let p = ((kf - r + 1.0) / kf).powi(n as i32) - ((kf - r) / kf).powi(n as i32);
            let freq = counts[state] as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * se + 1e-12, "n={n} rank={r}: {freq} vs {p}");
        }
    }
}

#[test]
fn uphill_moves_accepted_at_the_boltzmann_rate() {
    let land = Landscape::line(vec![0.0, 0.8]).unwrap();
    let t = 0.5;
    let expected = (-0.8f64 / t).exp();
    let mut rng = seeding::stream(5, 0, "test/uphill");
    let trials = 200_000;
    let mut accepted = 0;
    for _ in 0..trials {
        let (next, d) = f_upd(&ChainState::new(0), &land, 1, t, AcceptanceRule::Metropolis, &mut rng).unwrap();
        assert!((d.probability - expected).abs() < 1e-12);
        assert_eq!(next.g_b, 0);
        accepted += d.accepted as usize;
    }
    let freq = accepted as f64 / trials as f64;
    let se = (expected * (1.0 - expected) / trials as f64).sqrt();
    assert!((freq - expected).abs() < 4.0 * se);
}

#[test]
fn slow_cooling_ends_on_the_global_minimum() {
    // A slowly cooled chain on small rugged landscapes ends on the global minimum.
    let mut hits = 0;
    for seed in 0..20 {
        let land = Landscape::rugged(16, seed).unwrap();
        let cfg = ChainConfig { t_init: 1.0, alpha: 0.999, budget: 3000, seed, ..Default::default() };
        let traj = run_chain(&land, &cfg).unwrap();
        let exhaustive = land.values().iter().cloned().fold(f64::INFINITY, f64::min);
        hits += (land.f(traj.states.last().unwrap().g_b) == exhaustive) as usize;
    }
    assert!(hits >= 19, "{hits}/20");
}

#[test]
fn chain_state_replays_from_seed() {
    let land = Landscape::trap(32, 4).unwrap();
    let cfg = ChainConfig { seed: 99, budget: 500, ..Default::default() };
    assert_eq!(run_chain(&land, &cfg).unwrap(), run_chain(&land, &cfg).unwrap());
}
