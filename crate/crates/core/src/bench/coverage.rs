//! Mode coverage of generated samples against a known Gaussian mixture.

use super::data::MixtureSpec;
use crate::error::{Error, Result};
use crate::nn::RealMatrix;

/// Samples further than this many standard deviations from every mean are
/// low quality.
pub const QUALITY_RADIUS: f64 = 3.0;
/// Histogram cells per axis for the symmetric KL estimate.
pub const KL_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    /// Modes with at least `min_per_mode` high-quality samples.
    pub covered: usize,
    /// Fraction of samples within the quality radius of their nearest mean.
    pub hq_ratio: f64,
    /// Symmetric KL between the sample histogram and the mixture; NaN unless 2-D.
    pub sym_kl: f64,
    /// High-quality samples assigned to each mode.
    pub per_mode: Vec<usize>,
}

pub fn mode_coverage(samples: &RealMatrix, mixture: &MixtureSpec, min_per_mode: usize) -> Result<Coverage> {
    if samples.rows() == 0 {
        return Err(Error::argument("no samples to score"));
    }
    if samples.cols() != mixture.dim() {
        return Err(Error::Shape(format!(
            "samples have {} columns, mixture has dimension {}",
            samples.cols(),
            mixture.dim()
        )));
    }
    let mut per_mode = vec![0; mixture.n_components()];
    let radius = QUALITY_RADIUS * mixture.sigma();
    let mut hq = 0;
    for row in samples.iter_rows() {
        let (k, dist) = mixture.nearest(row);
        if dist <= radius {
            per_mode[k] += 1;
            hq += 1;
        }
    }
    let sym_kl = if mixture.dim() == 2 { histogram_sym_kl(samples, mixture) } else { f64::NAN };
    Ok(Coverage {
        covered: per_mode.iter().filter(|&&n| n >= min_per_mode).count(),
        hq_ratio: hq as f64 / samples.rows() as f64,
        sym_kl,
        per_mode,
    })
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Cell edges over the means' bounding box padded by the quality radius. The
/// outer edges stand for ±infinity when computing mixture mass.
fn edges(lo: f64, hi: f64) -> Vec<f64> {
    (0..=KL_BINS).map(|i| lo + (hi - lo) * i as f64 / KL_BINS as f64).collect()
}

fn cell_of(v: f64, lo: f64, hi: f64) -> usize {
    let t = ((v - lo) / (hi - lo) * KL_BINS as f64).floor();
    if t.is_nan() || t < 0.0 {
        0
    } else {
        (t as usize).min(KL_BINS - 1)
    }
}

/// Symmetric KL on a `KL_BINS²` grid with add-one smoothing on both sides. The
/// mixture side uses exact cell masses scaled to the sample count.
fn histogram_sym_kl(samples: &RealMatrix, mixture: &MixtureSpec) -> f64 {
    let pad = QUALITY_RADIUS * mixture.sigma();
    let bounds: Vec<(f64, f64)> = (0..2)
        .map(|j| {
            let lo = mixture.means().iter().map(|m| m[j]).fold(f64::INFINITY, f64::min) - pad;
            let hi = mixture.means().iter().map(|m| m[j]).fold(f64::NEG_INFINITY, f64::max) + pad;
            (lo, hi)
        })
        .collect();
    let mut counts = vec![0.0; KL_BINS * KL_BINS];
    for row in samples.iter_rows() {
        let i = cell_of(row[0], bounds[0].0, bounds[0].1);
        let j = cell_of(row[1], bounds[1].0, bounds[1].1);
        counts[i * KL_BINS + j] += 1.0;
    }
    // Per-axis cell masses for each component.
    let axis_mass = |axis: usize, mean: f64| -> Vec<f64> {
        let e = edges(bounds[axis].0, bounds[axis].1);
        let cdf: Vec<f64> = e
            .iter()
            .enumerate()
            .map(|(i, &x)| match i {
                0 => 0.0,
                i if i == KL_BINS => 1.0,
                _ => normal_cdf((x - mean) / mixture.sigma()),
            })
            .collect();
        cdf.windows(2).map(|w| w[1] - w[0]).collect()
    };
    let mut mass = vec![0.0; KL_BINS * KL_BINS];
    for (m, w) in mixture.means().iter().zip(mixture.weights()) {
        let mx = axis_mass(0, m[0]);
        let my = axis_mass(1, m[1]);
        for i in 0..KL_BINS {
            for j in 0..KL_BINS {
                mass[i * KL_BINS + j] += w * mx[i] * my[j];
            }
        }
    }
    let n = samples.rows() as f64;
    let denom = n + (KL_BINS * KL_BINS) as f64;
    counts
        .iter()
        .zip(&mass)
        .map(|(c, m)| {
            let p = (c + 1.0) / denom;
            let q = (n * m + 1.0) / denom;
            (p - q) * (p / q).ln()
        })
        .sum()
}
