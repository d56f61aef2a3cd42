//! Labelled datasets, Gaussian mixtures and CSV I/O.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nn::RealMatrix;
use crate::seeding;

/// Feature rows with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: RealMatrix,
    labels: Vec<usize>,
    classes: Vec<usize>,
    source: String,
}

impl Dataset {
    /// The class catalog is the sorted set of labels present.
    pub fn new(features: RealMatrix, labels: Vec<usize>, source: impl Into<String>) -> Result<Self> {
        let mut classes = labels.clone();
        classes.sort_unstable();
        classes.dedup();
        Self::with_classes(features, labels, classes, source)
    }

    pub fn with_classes(
        features: RealMatrix,
        labels: Vec<usize>,
        classes: Vec<usize>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if features.rows() == 0 {
            return Err(Error::argument("a dataset needs at least one row"));
        }
        if let Some(l) = labels.iter().find(|l| classes.binary_search(l).is_err()) {
            return Err(Error::argument(format!("label {l} is not in the class catalog")));
        }
        Ok(Self {
            features,
            labels,
            classes,
            source: source.into(),
        })
    }

    pub fn features(&self) -> &RealMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Row count per catalog class (zero for absent classes).
    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts: BTreeMap<usize, usize> = self.classes.iter().map(|&c| (c, 0)).collect();
        for l in &self.labels {
            *counts.entry(*l).or_default() += 1;
        }
        counts
    }

    pub fn indices_of(&self, class: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class).collect()
    }

    pub fn rows_of(&self, class: usize) -> RealMatrix {
        self.features.select_rows(&self.indices_of(class))
    }

    /// Rows at `indices`, keeping the catalog.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::with_classes(
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.classes.clone(),
            self.source.clone(),
        )
    }

    /// Appends rows, all labelled `class`.
    pub fn append(&self, rows: &RealMatrix, class: usize) -> Result<Self> {
        if rows.rows() == 0 {
            return Ok(self.clone());
        }
        let mut classes = self.classes.clone();
        if let Err(pos) = classes.binary_search(&class) {
            classes.insert(pos, class);
        }
        let mut labels = self.labels.clone();
        labels.extend(std::iter::repeat_n(class, rows.rows()));
        Self::with_classes(self.features.vstack(rows)?, labels, classes, self.source.clone())
    }

    /// Features scaled by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.features.data_mut().iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Header `f0,...,f{d-1},label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.dim() {
            let _ = write!(out, "f{j},");
        }
        out.push_str("label\n");
        for (row, label) in self.features.iter_rows().zip(&self.labels) {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{label}");
        }
        out
    }

    pub fn from_csv(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty dataset file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let d = cols.len().saturating_sub(1);
        let expected = (0..d).map(|j| format!("f{j}")).chain(["label".to_string()]);
        if d == 0 || !expected.eq(cols.iter().map(|c| c.to_string())) {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `f0,...,f{d-1},label`".into(),
            });
        }
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            let err = |m: String| Error::Parse {
                line: idx + 1,
                message: m,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != d + 1 {
                return Err(err(format!("expected {} fields, found {}", d + 1, fields.len())));
            }
            for f in &fields[..d] {
                let v = f.parse::<f64>().map_err(|_| err(format!("bad feature `{f}`")))?;
                if !v.is_finite() {
                    return Err(err(format!("non-finite feature `{f}`")));
                }
                data.push(v);
            }
            labels.push(fields[d].parse::<usize>().map_err(|_| err(format!("bad label `{}`", fields[d])))?);
        }
        let rows = labels.len();
        Self::new(RealMatrix::from_vec(rows, d, data)?, labels, source)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, path.display().to_string())
    }

    /// Concatenation of datasets with the same feature dimension.
    pub fn concat(parts: &[Dataset], source: impl Into<String>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::argument("nothing to concatenate"))?;
        let mut features = first.features.clone();
        let mut labels = first.labels.clone();
        for p in &parts[1..] {
            features = features.vstack(&p.features)?;
            labels.extend_from_slice(&p.labels);
        }
        Self::new(features, labels, source)
    }
}

/// Isotropic Gaussian mixture with a shared standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub means: Vec<Vec<f64>>,
    pub sigma: f64,
    pub weights: Vec<f64>,
}

impl MixtureSpec {
    /// Uniform weights.
    pub fn new(means: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        let k = means.len();
        Self::weighted(means, sigma, vec![1.0 / k.max(1) as f64; k])
    }

    pub fn weighted(means: Vec<Vec<f64>>, sigma: f64, weights: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::argument("a mixture needs at least one component"));
        }
        let d = means[0].len();
        if d == 0 || means.iter().any(|m| m.len() != d) {
            return Err(Error::argument("component means must share a positive dimension"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::argument(format!("sigma must be positive, got {sigma}")));
        }
        if weights.len() != means.len()
            || weights.iter().any(|w| !(*w >= 0.0))
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::argument("weights must be non-negative and sum to 1"));
        }
        Ok(Self { means, sigma, weights })
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    /// `n` samples and the component each came from.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (RealMatrix, Vec<usize>) {
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        let mut comps = Vec::with_capacity(n);
        for _ in 0..n {
            let c = self.pick(rng);
            comps.push(c);
            for j in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                data.push(self.means[c][j] + self.sigma * z);
            }
        }
        (RealMatrix::from_vec(n, d, data).expect("finite samples"), comps)
    }

    /// Index of the nearest mean (lowest index on ties) and its distance.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, m) in self.means.iter().enumerate() {
            let d2: f64 = m.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        (best.0, best.1.sqrt())
    }
}

fn mixture_dataset(spec: &MixtureSpec, n: usize, seed: u64, source: String) -> Result<(Dataset, MixtureSpec)> {
    let mut rng = seeding::stream(seed, 0, "bench/mixture");
    let (x, comps) = spec.sample(n, &mut rng);
    let classes = (0..spec.n_components()).collect();
    Ok((Dataset::with_classes(x, comps, classes, source)?, spec.clone()))
}

/// Means on a circle of radius `radius`, first at angle `phase`.
pub fn ring_means(k: usize, radius: f64, phase: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let a = phase + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            vec![radius * a.cos(), radius * a.sin()]
        })
        .collect()
}

/// `n` points from `k` equally weighted modes on a circle; labels are mode indices.
pub fn gaussian_ring(k: usize, radius: f64, sigma: f64, n: usize, seed: u64) -> Result<(Dataset, MixtureSpec)> {
    if k == 0 {
        return Err(Error::argument("ring needs at least one mode"));
    }
    let spec = MixtureSpec::new(ring_means(k, radius, 0.0), sigma)?;
    mixture_dataset(&spec, n, seed, format!("ring(k={k},r={radius},sigma={sigma})"))
}

/// `n` points from a `side × side` grid of modes centred on the origin.
pub fn gaussian_grid(side: usize, spacing: f64, sigma: f64, n: usize, seed: u64) -> Result<(Dataset, MixtureSpec)> {
    if side == 0 {
        return Err(Error::argument("grid side must be at least 1"));
    }
    let off = (side - 1) as f64 / 2.0;
    let means = (0..side)
        .flat_map(|i| (0..side).map(move |j| vec![(i as f64 - off) * spacing, (j as f64 - off) * spacing]))
        .collect();
    let spec = MixtureSpec::new(means, sigma)?;
    mixture_dataset(&spec, n, seed, format!("grid(side={side},spacing={spacing},sigma={sigma})"))
}

/// Several classes, each an 8-style ring of modes, rotated so that the modes of
/// different classes alternate around the same circle. Class `c` gets
/// `counts[c]` points. Returns the dataset and each class's mixture.
pub fn interleaved_rings(
    modes_per_class: usize,
    radius: f64,
    sigma: f64,
    counts: &[usize],
    seed: u64,
) -> Result<(Dataset, Vec<MixtureSpec>)> {
    let n_classes = counts.len();
    if n_classes < 2 || modes_per_class == 0 {
        return Err(Error::argument("need at least two classes and one mode per class"));
    }
    let step = 2.0 * std::f64::consts::PI / (modes_per_class * n_classes) as f64;
    let mut parts = Vec::with_capacity(n_classes);
    let mut specs = Vec::with_capacity(n_classes);
    for (c, &n) in counts.iter().enumerate() {
        let spec = MixtureSpec::new(ring_means(modes_per_class, radius, c as f64 * step), sigma)?;
        let mut rng = seeding::stream(seed, c as u64, "bench/interleaved");
        let (x, _) = spec.sample(n, &mut rng);
        parts.push(Dataset::new(x, vec![c; n], "")?);
        specs.push(spec);
    }
    let ds = Dataset::concat(
        &parts,
        format!("interleaved_rings(classes={n_classes},modes={modes_per_class},r={radius},sigma={sigma})"),
    )?;
    Ok((ds, specs))
}
