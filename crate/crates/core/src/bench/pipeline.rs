//! One benchmark cell: imbalance a task, rebalance it with a method, train the
//! classifier and score it.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use super::classifier::{evaluate, train_classifier, ClassifierConfig, Metrics};
use super::coverage::{mode_coverage, Coverage};
use super::data::{interleaved_rings, Dataset, MixtureSpec};
use super::imbalance::{balance_with_generator, make_imbalanced, random_oversample, DEFAULT_TEST_FRACTION};
use crate::error::{Error, Result};
use crate::losses::MutationObjective;
use crate::nn::RealMatrix;
use crate::seeding;
use crate::trainer::{self, Delivery, TrainMode, TrainOutcome, TrainerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Classifier on the imbalanced set.
    Cn,
    /// Classifier after random oversampling.
    OsCn,
    /// Single-objective GAN oversampling.
    FixedGan,
    /// Evolutionary GAN, best offspring always accepted.
    Egan,
    /// Evolutionary GAN with annealed acceptance.
    Aggan,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Cn, Method::OsCn, Method::FixedGan, Method::Egan, Method::Aggan];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Cn => "cn",
            Method::OsCn => "os_cn",
            Method::FixedGan => "fixed_gan",
            Method::Egan => "egan",
            Method::Aggan => "aggan",
        }
    }

    pub fn is_generative(self) -> bool {
        matches!(self, Method::FixedGan | Method::Egan | Method::Aggan)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::argument(format!("unknown method {s:?}; expected one of cn, os_cn, fixed_gan, egan, aggan")))
    }
}

/// A labelled dataset with a designated minority and majority class.
#[derive(Debug, Clone)]
pub struct BenchTask {
    pub name: String,
    pub data: Dataset,
    pub minority: usize,
    pub majority: usize,
    /// Ground truth for mode coverage, when the minority class is a known mixture.
    pub minority_mixture: Option<MixtureSpec>,
}

/// Two interleaved rings of `modes` Gaussians each. Class 1 is the minority.
pub fn ring_task(modes: usize, radius: f64, sigma: f64, n_per_class: usize, seed: u64) -> Result<BenchTask> {
    let (data, specs) = interleaved_rings(modes, radius, sigma, &[n_per_class, n_per_class], seed)?;
    Ok(BenchTask {
        name: "ring".into(),
        data,
        minority: 1,
        majority: 0,
        minority_mixture: Some(specs[1].clone()),
    })
}

/// A two-class slice of a labelled file, features multiplied by `scale`.
/// With `pool_rest`, every row outside the minority class is relabelled `majority`.
pub fn file_task(
    name: &str,
    data: &Dataset,
    minority: usize,
    majority: usize,
    pool_rest: bool,
    scale: f64,
) -> Result<BenchTask> {
    let keep: Vec<usize> = (0..data.len())
        .filter(|&i| pool_rest || data.labels()[i] == minority || data.labels()[i] == majority)
        .collect();
    if minority == majority {
        return Err(Error::argument(format!("{name}: minority and majority are both class {minority}")));
    }
    if !keep.iter().any(|&i| data.labels()[i] == minority) || keep.iter().all(|&i| data.labels()[i] == minority) {
        return Err(Error::argument(format!("{name}: need rows of both class {minority} and class {majority}")));
    }
    let mut classes = vec![minority, majority];
    classes.sort_unstable();
    let labels = keep
        .iter()
        .map(|&i| if data.labels()[i] == minority { minority } else { majority })
        .collect();
    let sub = Dataset::with_classes(data.features().select_rows(&keep), labels, classes, data.source().to_string())?;
    Ok(BenchTask {
        name: name.into(),
        data: sub.scaled(scale),
        minority,
        majority,
        minority_mixture: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub trainer: TrainerConfig,
    pub classifier: ClassifierConfig,
    pub fixed_objective: MutationObjective,
    pub test_fraction: f64,
    /// Generator samples drawn for mode coverage.
    pub coverage_samples: usize,
    pub min_per_mode: usize,
    pub delivery: Delivery,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            trainer: TrainerConfig::default(),
            classifier: ClassifierConfig::default(),
            fixed_objective: MutationObjective::Minimax,
            test_fraction: DEFAULT_TEST_FRACTION,
            coverage_samples: 8000,
            min_per_mode: 20,
            delivery: Delivery::default(),
        }
    }
}

impl BenchOptions {
    /// Trainer settings for a generative method.
    pub fn trainer_for(&self, method: Method) -> Option<TrainerConfig> {
        let mode = match method {
            Method::Cn | Method::OsCn => return None,
            Method::FixedGan => TrainMode::Fixed(self.fixed_objective),
            Method::Egan => TrainMode::Egan,
            Method::Aggan => TrainMode::Aggan,
        };
        Some(TrainerConfig { mode, ..self.trainer.clone() })
    }
}

/// One line of a metrics file. Coverage columns are empty for methods or tasks
/// without a generator or a known mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub ir: f64,
    pub seed: String,
    pub accuracy: f64,
    pub prec_min: f64,
    pub rec_min: f64,
    pub f1_min: f64,
    pub prec_maj: f64,
    pub rec_maj: f64,
    pub f1_maj: f64,
    pub modes: Option<f64>,
    pub hq_ratio: Option<f64>,
    pub sym_kl: Option<f64>,
}

pub const METRICS_HEADER: &str =
    "method,ir,seed,accuracy,prec_min,rec_min,f1_min,prec_maj,rec_maj,f1_maj,modes,hq_ratio,sym_kl";

impl MetricsRow {
    fn from_metrics(method: Method, ir: f64, seed: &str, task: &BenchTask, m: &Metrics, cov: Option<&Coverage>) -> Result<Self> {
        let min = m.class(task.minority).ok_or_else(|| Error::argument("minority class missing from metrics"))?;
        let maj = m.class(task.majority).ok_or_else(|| Error::argument("majority class missing from metrics"))?;
        Ok(Self {
            method: method.to_string(),
            ir,
            seed: seed.to_string(),
            accuracy: m.accuracy,
            prec_min: min.precision,
            rec_min: min.recall,
            f1_min: min.f1,
            prec_maj: maj.precision,
            rec_maj: maj.recall,
            f1_maj: maj.f1,
            modes: cov.map(|c| c.covered as f64),
            hq_ratio: cov.map(|c| c.hq_ratio),
            sym_kl: cov.map(|c| c.sym_kl),
        })
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            self.method,
            self.ir,
            self.seed,
            self.accuracy,
            self.prec_min,
            self.rec_min,
            self.f1_min,
            self.prec_maj,
            self.rec_maj,
            self.f1_maj,
            opt(self.modes),
            opt(self.hq_ratio),
            opt(self.sym_kl)
        )
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv_line());
    }
    out
}

/// Seed means per (method, IR), in order of first appearance. The seed column
/// reads `mean`. A coverage column is averaged only when every row has it.
pub fn aggregate_means(rows: &[MetricsRow]) -> Vec<MetricsRow> {
    let mut groups: Vec<((String, u64), Vec<&MetricsRow>)> = Vec::new();
    for r in rows {
        let key = (r.method.clone(), r.ir.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(_, g)| {
            let n = g.len() as f64;
            let mean = |f: fn(&MetricsRow) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / n;
            let mean_opt = |f: fn(&MetricsRow) -> Option<f64>| {
                g.iter().map(|r| f(r)).collect::<Option<Vec<f64>>>().map(|v| v.iter().sum::<f64>() / n)
            };
            MetricsRow {
                method: g[0].method.clone(),
                ir: g[0].ir,
                seed: "mean".into(),
                accuracy: mean(|r| r.accuracy),
                prec_min: mean(|r| r.prec_min),
                rec_min: mean(|r| r.rec_min),
                f1_min: mean(|r| r.f1_min),
                prec_maj: mean(|r| r.prec_maj),
                rec_maj: mean(|r| r.rec_maj),
                f1_maj: mean(|r| r.f1_maj),
                modes: mean_opt(|r| r.modes),
                hq_ratio: mean_opt(|r| r.hq_ratio),
                sym_kl: mean_opt(|r| r.sym_kl),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub row: MetricsRow,
    pub metrics: Metrics,
    pub coverage: Option<Coverage>,
    pub train: Dataset,
    pub test: Dataset,
    pub training: Option<TrainOutcome>,
}

/// Runs `method` on `task` at imbalance ratio `ir`. Every method sees the same
/// split, subsample and classifier initialisation for a given `master_seed`;
/// GAN methods also share their network initialisation.
pub fn run_method(
    task: &BenchTask,
    method: Method,
    ir: f64,
    seed_label: &str,
    master_seed: u64,
    opts: &BenchOptions,
) -> Result<MethodRun> {
    let (train, test) = make_imbalanced(
        &task.data,
        task.minority,
        task.majority,
        ir,
        opts.test_fraction,
        seeding::derive_seed(master_seed, 0, "bench/split"),
    )?;
    let mut training = None;
    let mut coverage = None;
    let balanced = match method {
        Method::Cn => train.clone(),
        Method::OsCn => random_oversample(&train, seeding::derive_seed(master_seed, 0, "bench/duplicate"))?,
        _ => {
            let mut cfg = opts.trainer_for(method).expect("generative method");
            cfg.seed = seeding::derive_seed(master_seed, 0, "bench/gan");
            let outcome = trainer::train(&cfg, &train.rows_of(task.minority)).map_err(|f| f.error)?;
            let gen_seed = seeding::derive_seed(master_seed, 0, "bench/generate");
            let g = outcome.delivered(opts.delivery);
            if let Some(mixture) = &task.minority_mixture {
                let samples = trainer::generate(&outcome.nets.generator, g, opts.coverage_samples, gen_seed)?;
                coverage = Some(mode_coverage(&samples, mixture, opts.min_per_mode)?);
            }
            let out = balance_with_generator(&train, task.minority, &outcome.nets.generator, g, gen_seed)?;
            training = Some(outcome);
            out
        }
    };
    let clf = train_classifier(&balanced, &opts.classifier, seeding::derive_seed(master_seed, 0, "bench/classifier"))?;
    let metrics = evaluate(&clf, &test)?;
    let row = MetricsRow::from_metrics(method, ir, seed_label, task, &metrics, coverage.as_ref())?;
    Ok(MethodRun { row, metrics, coverage, train, test, training })
}

/// Trains a generator on `n_train` points of `mixture` and scores the delivered
/// generator's samples for mode coverage.
pub fn coverage_run(
    mixture: &MixtureSpec,
    n_train: usize,
    cfg: &TrainerConfig,
    opts: &BenchOptions,
    master_seed: u64,
) -> Result<(Coverage, TrainOutcome)> {
    let mut rng = seeding::stream(master_seed, 0, "bench/coverage-data");
    let (data, _) = mixture.sample(n_train, &mut rng);
    let cfg = TrainerConfig {
        seed: seeding::derive_seed(master_seed, 0, "bench/gan"),
        ..cfg.clone()
    };
    let outcome = trainer::train(&cfg, &data).map_err(|f| f.error)?;
    let samples: RealMatrix = trainer::generate(
        &outcome.nets.generator,
        outcome.delivered(opts.delivery),
        opts.coverage_samples,
        seeding::derive_seed(master_seed, 0, "bench/generate"),
    )?;
    Ok((mode_coverage(&samples, mixture, opts.min_per_mode)?, outcome))
}

/// Mean of a metric over rows grouped by method.
pub fn method_means(rows: &[MetricsRow], f: fn(&MetricsRow) -> f64) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.method.clone()).or_default();
        e.0 += f(r);
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_opts() -> BenchOptions {
        BenchOptions {
            trainer: TrainerConfig {
                iterations: 20,
                batch_size: 16,
                eval_batch_size: 16,
                generator_hidden: vec![8],
                discriminator_hidden: vec![8],
                ..TrainerConfig::default()
            },
            classifier: ClassifierConfig { epochs: 2, hidden: vec![8], ..Default::default() },
            coverage_samples: 400,
            ..BenchOptions::default()
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("smote".parse::<Method>().is_err());
    }

    #[test]
    fn every_method_runs_and_is_deterministic() {
        let task = ring_task(4, 2.0, 0.1, 300, 1).unwrap();
        let opts = quick_opts();
        for m in Method::ALL {
            let a = run_method(&task, m, 10.0, "0", 42, &opts).unwrap();
            let b = run_method(&task, m, 10.0, "0", 42, &opts).unwrap();
            assert_eq!(a.row.to_csv_line(), b.row.to_csv_line());
            assert_eq!(a.row.modes.is_some(), m.is_generative());
            let c = a.metrics.confusion.iter().map(|r| r.iter().sum::<u64>()).collect::<Vec<_>>();
            assert_eq!(c[0], c[1], "balanced test set");
        }
    }

    #[test]
    fn means_group_by_method_and_ir() {
        let task = ring_task(4, 2.0, 0.1, 200, 1).unwrap();
        let opts = quick_opts();
        let mut rows = Vec::new();
        for m in [Method::Cn, Method::OsCn] {
            for ir in [10.0, 100.0] {
                for s in 0..3u64 {
                    rows.push(run_method(&task, m, ir, &s.to_string(), s, &opts).unwrap().row);
                }
            }
        }
        let means = aggregate_means(&rows);
        assert_eq!(means.len(), 4);
        let expect = (rows[0].accuracy + rows[1].accuracy + rows[2].accuracy) / 3.0;
        assert!((means[0].accuracy - expect).abs() < 1e-15);
        assert_eq!(means[0].modes, None);
        let csv = metrics_csv(&means);
        assert!(csv.starts_with(METRICS_HEADER));
        assert!(csv.lines().nth(1).unwrap().starts_with("cn,10,mean,"));
    }
}
