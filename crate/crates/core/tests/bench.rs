use std::collections::BTreeMap;

use aggan_core::bench::imbalance::multiclass_balance;
use aggan_core::bench::{
    evaluate, gaussian_ring, interleaved_rings, make_imbalanced, mode_coverage, train_classifier, ClassifierConfig,
    Dataset, MixtureSpec,
};
use aggan_core::seeding;
use aggan_core::trainer::{train, TrainerConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn coverage_ignores_component_order(seed in any::<u64>(), k in 2usize..9, rot in 0usize..8) {
        let (ds, spec) = gaussian_ring(k, 2.0, 0.05, 400, seed).unwrap();
        let mut means = spec.means().to_vec();
        means.rotate_left(rot % k);
        means.reverse();
        let shuffled = MixtureSpec::new(means, spec.sigma()).unwrap();
        let a = mode_coverage(ds.features(), &spec, 5).unwrap();
        let b = mode_coverage(ds.features(), &shuffled, 5).unwrap();
        prop_assert_eq!(a.covered, b.covered);
        prop_assert_eq!(a.hq_ratio, b.hq_ratio);
        prop_assert!((a.sym_kl - b.sym_kl).abs() < 1e-9);
        let mut pa = a.per_mode.clone();
        let mut pb = b.per_mode.clone();
        pa.sort();
        pb.sort();
        prop_assert_eq!(pa, pb);
    }
}

#[test]
fn true_samples_cover_every_mode() {
    let (_, spec) = gaussian_ring(8, 2.0, 0.05, 10, 0).unwrap();
    let mut rng = seeding::stream(3, 0, "test");
    let (x, _) = spec.sample(8000, &mut rng);
    let c = mode_coverage(&x, &spec, 20).unwrap();
    assert_eq!(c.covered, 8);
    assert!(c.hq_ratio > 0.97);
    assert!(c.sym_kl < 0.05, "{}", c.sym_kl);
}

fn minority_recall(train_set: &Dataset, test: &Dataset, classes: &[usize]) -> f64 {
    let clf = train_classifier(train_set, &ClassifierConfig::default(), 7).unwrap();
    let m = evaluate(&clf, test).unwrap();
    classes.iter().map(|&c| m.class(c).unwrap().recall).sum::<f64>() / classes.len() as f64
}

#[test]
fn generator_balancing_helps_a_three_class_ring() {
    // Class 0 is plentiful; classes 1 and 2 are each cut to a twentieth.
    let (full, _) = interleaved_rings(4, 2.0, 0.05, &[1200, 1200, 1200], 5).unwrap();
    let mut rng = seeding::stream(5, 0, "test/split");
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in 0..3 {
        let mut idx = full.indices_of(class);
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let (te, tr) = idx.split_at(240);
        test_idx.extend_from_slice(te);
        let keep = if class == 0 { tr.len() } else { tr.len() / 20 };
        train_idx.extend_from_slice(&tr[..keep]);
    }
    let train_set = full.subset(&train_idx).unwrap();
    let test = full.subset(&test_idx).unwrap();

    let cfg = TrainerConfig {
        iterations: 2500,
        generator_hidden: vec![32, 32],
        discriminator_hidden: vec![32, 32],
        ..TrainerConfig::default()
    };
    let mut generators = BTreeMap::new();
    for class in [1usize, 2] {
        let out = train(&TrainerConfig { seed: class as u64, ..cfg.clone() }, &train_set.rows_of(class)).unwrap();
        generators.insert(class, (out.nets.generator.clone(), out.final_generator));
    }
    let balanced = multiclass_balance(&train_set, &generators, 9).unwrap();
    let counts = balanced.class_counts();
    assert!(counts.values().all(|&n| n == counts[&0]));

    let base = minority_recall(&train_set, &test, &[1, 2]);
    let boosted = minority_recall(&balanced, &test, &[1, 2]);
    assert!(boosted > base, "cn {base} vs balanced {boosted}");
}

#[test]
fn imbalanced_split_is_reproducible() {
    let (ds, _) = interleaved_rings(8, 2.0, 0.05, &[1000, 1000], 2).unwrap();
    let a = make_imbalanced(&ds, 1, 0, 10.0, 0.2, 4).unwrap();
    let b = make_imbalanced(&ds, 1, 0, 10.0, 0.2, 4).unwrap();
    assert_eq!(a.0.to_csv(), b.0.to_csv());
    assert_eq!(a.1.to_csv(), b.1.to_csv());
    let counts = a.0.class_counts();
    assert_eq!(counts[&1], 80);
}
