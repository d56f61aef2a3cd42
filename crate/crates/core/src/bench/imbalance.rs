//! Imbalanced splits and the three ways of rebalancing them: duplication,
//! generator sampling for one minority class, and generator sampling for every
//! deficient class.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{MlpSpec, ParamSet, RealMatrix};
use crate::seeding;
use crate::trainer;

/// Fraction of each class held out (stratified, balanced) before imbalancing.
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

/// Splits `data` into an imbalanced train set and a balanced test set.
///
/// The test split takes the same number of rows from both classes and depends
/// only on `seed`. Every remaining majority row is kept; the minority is
/// subsampled without replacement to `round(majority / ir)` rows (at least one).
/// Rows of other classes are dropped.
pub fn make_imbalanced(
    data: &Dataset,
    minority: usize,
    majority: usize,
    ir: f64,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if minority == majority {
        return Err(Error::argument("minority and majority classes must differ"));
    }
    if !(ir >= 1.0 && ir.is_finite()) {
        return Err(Error::argument(format!("imbalance ratio must be at least 1, got {ir}")));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::argument("test fraction must lie in (0,1)"));
    }
    let mut split_rng = seeding::stream(seed, 0, "bench/split");
    let mut min_idx = data.indices_of(minority);
    let mut maj_idx = data.indices_of(majority);
    if min_idx.len() < 2 || maj_idx.len() < 2 {
        return Err(Error::argument(format!(
            "classes {minority} and {majority} need at least two rows each"
        )));
    }
    min_idx.shuffle(&mut split_rng);
    maj_idx.shuffle(&mut split_rng);
    let n_test = ((test_fraction * min_idx.len().min(maj_idx.len()) as f64).round() as usize).max(1);
    let mut test: Vec<usize> = min_idx[..n_test].iter().chain(&maj_idx[..n_test]).copied().collect();
    let rest_min = &min_idx[n_test..];
    let rest_maj = &maj_idx[n_test..];

    let n_maj = rest_maj.len();
    let n_min = (n_maj as f64 / ir).round() as usize;
    if n_min == 0 {
        return Err(Error::argument(format!(
            "imbalance ratio {ir} is unattainable with {n_maj} majority rows; max feasible IR is {}",
            2 * n_maj
        )));
    }
    if n_min > rest_min.len() {
        return Err(Error::argument(format!(
            "imbalance ratio {ir} needs {n_min} minority rows but only {} are available; \
             the smallest feasible IR is {:.4}",
            rest_min.len(),
            n_maj as f64 / rest_min.len() as f64
        )));
    }
    let mut pool = rest_min.to_vec();
    pool.shuffle(&mut seeding::stream(seed, 0, "bench/subsample"));
    let mut train: Vec<usize> = rest_maj.iter().chain(&pool[..n_min]).copied().collect();
    train.sort_unstable();
    test.sort_unstable();

    let mut classes = vec![minority, majority];
    classes.sort_unstable();
    let pick = |idx: &[usize]| {
        Dataset::with_classes(
            data.features().select_rows(idx),
            idx.iter().map(|&i| data.labels()[i]).collect(),
            classes.clone(),
            data.source().to_string(),
        )
    };
    Ok((pick(&train)?, pick(&test)?))
}

/// Largest class count and the class holding it (lowest id on ties).
pub fn majority_count(data: &Dataset) -> (usize, usize) {
    data.class_counts()
        .into_iter()
        .fold((0, 0), |best, (c, n)| if n > best.1 { (c, n) } else { best })
}

/// Random oversampling: duplicates rows of each deficient class, drawn uniformly
/// with replacement, until every class matches the largest.
pub fn random_oversample(train: &Dataset, seed: u64) -> Result<Dataset> {
    let (_, target) = majority_count(train);
    let mut rng = seeding::stream(seed, 0, "bench/duplicate");
    let mut out = train.clone();
    for (class, n) in train.class_counts() {
        if n == 0 {
            return Err(Error::argument(format!("class {class} has no rows to duplicate")));
        }
        let idx = train.indices_of(class);
        let picks: Vec<usize> = (0..target - n).map(|_| idx[rng.random_range(0..idx.len())]).collect();
        out = out.append(&train.features().select_rows(&picks), class)?;
    }
    Ok(out)
}

/// Exactly `n_needed` rows `G(z)`, `z ~ N(0, I)`.
pub fn oversample_with_generator(
    spec: &MlpSpec,
    generator: &ParamSet,
    n_needed: usize,
    seed: u64,
) -> Result<RealMatrix> {
    if n_needed == 0 {
        return Ok(RealMatrix::zeros(0, spec.output_width()));
    }
    trainer::generate(spec, generator, n_needed, seeding::derive_seed(seed, 0, "bench/oversample"))
}

/// Appends generated `class` rows until it matches the largest class.
pub fn balance_with_generator(
    train: &Dataset,
    class: usize,
    spec: &MlpSpec,
    generator: &ParamSet,
    seed: u64,
) -> Result<Dataset> {
    let (_, target) = majority_count(train);
    let have = train.class_counts().get(&class).copied().unwrap_or(0);
    let rows = oversample_with_generator(spec, generator, target - have, seed)?;
    train.append(&rows, class)
}

/// Raises every class to the majority count with that class's generator.
pub fn multiclass_balance(
    train: &Dataset,
    generators: &BTreeMap<usize, (MlpSpec, ParamSet)>,
    seed: u64,
) -> Result<Dataset> {
    let (_, target) = majority_count(train);
    let mut out = train.clone();
    for (class, n) in train.class_counts() {
        if n == target {
            continue;
        }
        let (spec, params) = generators
            .get(&class)
            .ok_or_else(|| Error::argument(format!("no generator for deficient class {class}")))?;
        let rows = oversample_with_generator(spec, params, target - n, seeding::derive_seed(seed, class as u64, "bench/multiclass"))?;
        out = out.append(&rows, class)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::data::interleaved_rings;
    use crate::nn::{HiddenActivation, OutputActivation};
    use proptest::prelude::*;

    fn two_class(n_min: usize, n_maj: usize) -> Dataset {
        interleaved_rings(8, 2.0, 0.1, &[n_maj, n_min], 3).unwrap().0
    }

    fn test_hash(d: &Dataset) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in d.features().data() {
            h = (h ^ v.to_bits()).wrapping_mul(0x100_0000_01b3);
        }
        h
    }

    fn gen_spec() -> (MlpSpec, ParamSet) {
        let spec = MlpSpec::uniform(2, &[4], 2, HiddenActivation::Tanh, OutputActivation::Identity).unwrap();
        let p = spec.init(&mut seeding::stream(1, 0, "t"));
        (spec, p)
    }

    #[test]
    fn ir_100_gives_fifty_minority() {
        // 6250 majority rows -> 1250 held out -> 5000 kept.
        let data = two_class(6250, 6250);
        let (train, test) = make_imbalanced(&data, 1, 0, 100.0, 0.2, 7).unwrap();
        let counts = train.class_counts();
        assert_eq!(counts[&0], 5000);
        assert_eq!(counts[&1], 50);
        assert_eq!(test.class_counts()[&0], test.class_counts()[&1]);
    }

    #[test]
    fn ir_one_is_balanced() {
        let data = two_class(100, 100);
        let (train, _) = make_imbalanced(&data, 1, 0, 1.0, 0.2, 1).unwrap();
        assert_eq!(train.class_counts()[&0], train.class_counts()[&1]);
    }

    #[test]
    fn test_split_ignores_ir() {
        let data = two_class(500, 500);
        let hashes: Vec<u64> = [1.0, 10.0, 50.0, 100.0]
            .iter()
            .map(|&ir| test_hash(&make_imbalanced(&data, 1, 0, ir, 0.2, 99).unwrap().1))
            .collect();
        assert!(hashes.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn unattainable_ratios() {
        let data = two_class(20, 500);
        let err = make_imbalanced(&data, 1, 0, 2.0, 0.2, 0).unwrap_err().to_string();
        assert!(err.contains("smallest feasible IR"), "{err}");
        let err = make_imbalanced(&data, 1, 0, 5000.0, 0.2, 0).unwrap_err().to_string();
        assert!(err.contains("max feasible IR"), "{err}");
        assert!(make_imbalanced(&data, 1, 0, 0.5, 0.2, 0).is_err());
        assert!(make_imbalanced(&data, 1, 1, 2.0, 0.2, 0).is_err());
    }

    #[test]
    fn generator_oversampling() {
        let (spec, p) = gen_spec();
        let data = two_class(5, 500);
        assert_eq!(oversample_with_generator(&spec, &p, 0, 1).unwrap().rows(), 0);
        let balanced = balance_with_generator(&data, 1, &spec, &p, 3).unwrap();
        assert_eq!(balanced.class_counts()[&1], 500);
        assert_eq!(balanced.class_counts()[&0], 500);
        let a = oversample_with_generator(&spec, &p, 10, 4).unwrap();
        let b = oversample_with_generator(&spec, &p, 10, 4).unwrap();
        let c = oversample_with_generator(&spec, &p, 10, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_oversampling_balances() {
        let data = two_class(7, 90);
        let out = random_oversample(&data, 2).unwrap();
        assert_eq!(out.class_counts()[&1], 90);
        // Duplicates only: every minority row already existed.
        let originals = data.rows_of(1);
        for row in out.rows_of(1).iter_rows() {
            assert!(originals.iter_rows().any(|r| r == row));
        }
    }

    #[test]
    fn multiclass_balancing() {
        let (spec, p) = gen_spec();
        let (data, _) = interleaved_rings(8, 2.0, 0.1, &[100, 50, 10], 1).unwrap();
        let gens = BTreeMap::from([(1, (spec.clone(), p.clone())), (2, (spec.clone(), p.clone()))]);
        let out = multiclass_balance(&data, &gens, 0).unwrap();
        assert_eq!(out.class_counts().into_values().collect::<Vec<_>>(), vec![100, 100, 100]);
        let missing = BTreeMap::from([(1, (spec, p))]);
        assert!(multiclass_balance(&data, &missing, 0).is_err());
        let (balanced, _) = interleaved_rings(8, 2.0, 0.1, &[30, 30, 30], 1).unwrap();
        assert_eq!(multiclass_balance(&balanced, &BTreeMap::new(), 0).unwrap(), balanced);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn realized_ratio_matches_request(n_maj in 50usize..400, ir in 1.0f64..60.0, seed in 0u64..1000) {
            let data = two_class(n_maj, n_maj);
            let (train, _) = make_imbalanced(&data, 1, 0, ir, 0.2, seed).unwrap();
            let c = train.class_counts();
            let ideal = c[&0] as f64 / ir;
            prop_assert!((c[&1] as f64 - ideal).abs() <= 1.0);
            prop_assert!(c[&1] >= 1);
        }
    }
}
