//! Softmax MLP classifier and per-class metrics.

use rand::seq::SliceRandom;

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{backward, forward, HiddenActivation, MlpSpec, OptState, OutputActivation, ParamSet, RealMatrix, PROB_EPS};
use crate::seeding;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    pub hidden: Vec<usize>,
    pub activation: HiddenActivation,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            hidden: vec![32, 32],
            activation: HiddenActivation::Relu,
            epochs: 30,
            batch_size: 64,
            lr: 1e-3,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::argument("classifier epochs and batch size must be positive"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::argument("classifier learning rate must be positive"));
        }
        Ok(())
    }
}

/// A trained classifier with the standardization fitted on its training set.
#[derive(Debug, Clone)]
pub struct Classifier {
    spec: MlpSpec,
    params: ParamSet,
    classes: Vec<usize>,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Classifier {
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn standardize(&self, x: &RealMatrix) -> Result<RealMatrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "classifier expects {} features, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        Ok(standardize(x, &self.mean, &self.scale))
    }

    /// Class probabilities, one column per catalog entry.
    pub fn predict_proba(&self, x: &RealMatrix) -> Result<RealMatrix> {
        Ok(forward(&self.spec, &self.params, &self.standardize(x)?)?.0)
    }

    /// Predicted labels (argmax; lowest catalog index on ties).
    pub fn predict(&self, x: &RealMatrix) -> Result<Vec<usize>> {
        let p = self.predict_proba(x)?;
        Ok(p.iter_rows()
            .map(|row| {
                let mut best = 0;
                for (i, v) in row.iter().enumerate() {
                    if *v > row[best] {
                        best = i;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

fn standardize(x: &RealMatrix, mean: &[f64], scale: &[f64]) -> RealMatrix {
    let mut out = x.clone();
    for r in 0..out.rows() {
        for (j, v) in out.row_mut(r).iter_mut().enumerate() {
            *v = (*v - mean[j]) / scale[j];
        }
    }
    out
}

fn column_stats(x: &RealMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows() as f64;
    let mut mean = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v / n);
    }
    let mut var = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        var.iter_mut().zip(row).zip(&mean).for_each(|((s, v), m)| *s += (v - m) * (v - m) / n);
    }
    // Constant features are left unscaled.
    let scale = var.into_iter().map(|v| if v.sqrt() > 1e-8 { v.sqrt() } else { 1.0 }).collect();
    (mean, scale)
}

/// Mini-batch Adam on the mean cross-entropy, reshuffling every epoch.
pub fn train_classifier(train: &Dataset, cfg: &ClassifierConfig, seed: u64) -> Result<Classifier> {
    cfg.validate()?;
    let classes = train.classes().to_vec();
    if classes.len() < 2 {
        return Err(Error::argument("a classifier needs at least two classes"));
    }
    let counts = train.class_counts();
    if let Some(c) = classes.iter().find(|c| !counts.contains_key(c)) {
        return Err(Error::argument(format!("class {c} has no training rows")));
    }
    let spec = MlpSpec::uniform(train.dim(), &cfg.hidden, classes.len(), cfg.activation, OutputActivation::Softmax)?;
    let mut rng = seeding::stream(seed, 0, "bench/classifier");
    let mut params = spec.init(&mut rng);
    let mut opt = OptState::adam(cfg.lr);

    let (mean, scale) = column_stats(train.features());
    let x = standardize(train.features(), &mean, &scale);
    let targets: Vec<usize> = train
        .labels()
        .iter()
        .map(|l| classes.binary_search(l).expect("label in catalog"))
        .collect();
    let mut order: Vec<usize> = (0..train.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select_rows(batch);
            let (p, tape) = forward(&spec, &params, &xb)?;
            let n = batch.len() as f64;
            let mut grad = RealMatrix::zeros(batch.len(), classes.len());
            for (r, &i) in batch.iter().enumerate() {
                let t = targets[i];
                grad.set(r, t, -1.0 / (n * p.get(r, t).max(PROB_EPS)));
            }
            let (g, _) = backward(&spec, &params, &tape, &grad)?;
            opt.step(&mut params, &g)?;
        }
    }
    Ok(Classifier { spec, params, classes, mean, scale })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Confusion matrix (rows true, columns predicted) and derived scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub classes: Vec<usize>,
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

impl Metrics {
    pub fn from_predictions(classes: &[usize], truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape(format!(
                "{} labels but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let k = classes.len();
        let index = |c: &usize| {
            classes
                .iter()
                .position(|x| x == c)
                .ok_or_else(|| Error::argument(format!("label {c} is not in the class catalog")))
        };
        let mut confusion = vec![vec![0u64; k]; k];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[index(t)?][index(p)?] += 1;
        }
        Self::from_confusion(classes, confusion)
    }

    /// Scores from a confusion matrix. Precision, recall and F1 are 0 where
    /// their denominators are 0.
    pub fn from_confusion(classes: &[usize], confusion: Vec<Vec<u64>>) -> Result<Self> {
        let k = classes.len();
        if confusion.len() != k || confusion.iter().any(|r| r.len() != k) {
            return Err(Error::Shape(format!("confusion matrix must be {k}x{k}")));
        }
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::argument("cannot score an empty test set"));
        }
        let diag: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let per_class = (0..k)
            .map(|i| {
                let tp = confusion[i][i];
                let support: u64 = confusion[i].iter().sum();
                let predicted: u64 = confusion.iter().map(|r| r[i]).sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassMetrics { class: classes[i], precision, recall, f1, support }
            })
            .collect();
        Ok(Self {
            classes: classes.to_vec(),
            confusion,
            accuracy: diag as f64 / total as f64,
            per_class,
        })
    }

    pub fn class(&self, class: usize) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|m| m.class == class)
    }
}

/// Scores `clf` on `test`.
pub fn evaluate(clf: &Classifier, test: &Dataset) -> Result<Metrics> {
    let predicted = clf.predict(test.features())?;
    Metrics::from_predictions(clf.classes(), test.labels(), &predicted)
}
