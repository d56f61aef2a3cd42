//! Generator mutation objectives, the discriminator objective and offspring fitness.
//!
//! Generator losses are minimized; fitness is maximized. Every loss takes
//! discriminator probabilities, which the network clamps into `[ε, 1 − ε]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One of the three generator objectives used to breed offspring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationObjective {
    /// `mean(log(1 − D(G(z))))`
    Minimax,
    /// `−mean(log D(G(z)))`, the modified minimax loss.
    NonSaturating,
    /// `mean((D(G(z)) − 1)²)`
    LeastSquares,
}

impl MutationObjective {
    pub const ALL: [MutationObjective; 3] = [
        MutationObjective::Minimax,
        MutationObjective::NonSaturating,
        MutationObjective::LeastSquares,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationObjective::Minimax => "minimax",
            MutationObjective::NonSaturating => "nonsaturating",
            MutationObjective::LeastSquares => "leastsquares",
        }
    }
}

impl fmt::Display for MutationObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MutationObjective::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::argument(format!("unknown objective `{s}`")))
    }
}

/// A loss value with its partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Discriminator loss and its partials with respect to each probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscLossEval {
    pub value: f64,
    pub grad_real: Vec<f64>,
    pub grad_fake: Vec<f64>,
}

/// `−mean(log d_real) − mean(log(1 − d_fake))`.
pub fn disc_loss(d_real: &[f64], d_fake: &[f64]) -> Result<DiscLossEval> {
    if d_real.is_empty() || d_fake.is_empty() {
        return Err(Error::argument("discriminator loss needs non-empty batches"));
    }
    let (nr, nf) = (d_real.len() as f64, d_fake.len() as f64);
    let value = -d_real.iter().map(|d| d.ln()).sum::<f64>() / nr
        - d_fake.iter().map(|d| (1.0 - d).ln()).sum::<f64>() / nf;
    Ok(DiscLossEval {
        value,
        grad_real: d_real.iter().map(|d| -1.0 / (nr * d)).collect(),
        grad_fake: d_fake.iter().map(|d| 1.0 / (nf * (1.0 - d))).collect(),
    })
}

/// Generator loss under `objective`; lower means the fakes look more real.
pub fn gen_loss(objective: MutationObjective, d_fake: &[f64]) -> Result<LossEval> {
    if d_fake.is_empty() {
        return Err(Error::argument("generator loss needs a non-empty batch"));
    }
    let n = d_fake.len() as f64;
    let (value, grad) = match objective {
        MutationObjective::Minimax => (
            d_fake.iter().map(|d| (1.0 - d).ln()).sum::<f64>() / n,
            d_fake.iter().map(|d| -1.0 / (n * (1.0 - d))).collect(),
        ),
        MutationObjective::NonSaturating => (
            -d_fake.iter().map(|d| d.ln()).sum::<f64>() / n,
            d_fake.iter().map(|d| -1.0 / (n * d)).collect(),
        ),
        MutationObjective::LeastSquares => (
            d_fake.iter().map(|d| (d - 1.0) * (d - 1.0)).sum::<f64>() / n,
            d_fake.iter().map(|d| 2.0 * (d - 1.0) / n).collect(),
        ),
    };
    Ok(LossEval { value, grad })
}

/// Smallest gradient norm fed to the logarithm of the diversity term.
pub const MIN_GRAD_NORM: f64 = 1e-12;

/// Quality and diversity of a generator, combined as `quality + weight·diversity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessScore {
    pub quality: f64,
    pub diversity: f64,
    pub weight: f64,
    pub combined: f64,
}

impl FitnessScore {
    pub fn new(quality: f64, diversity: f64, weight: f64) -> Self {
        Self {
            quality,
            diversity,
            weight,
            combined: quality + weight * diversity,
        }
    }
}

/// Quality is the mean discriminator score on fakes; diversity is
/// `−log ‖∇_θD L_D‖` with the norm floored at [`MIN_GRAD_NORM`].
pub fn fitness(d_fake: &[f64], disc_grad_norm: f64, weight: f64) -> FitnessScore {
    let quality = if d_fake.is_empty() {
        0.0
    } else {
        d_fake.iter().sum::<f64>() / d_fake.len() as f64
    };
    let diversity = -disc_grad_norm.max(MIN_GRAD_NORM).ln();
    FitnessScore::new(quality, diversity, weight)
}
