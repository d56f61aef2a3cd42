//! Simulated-annealing state: Metropolis acceptance and geometric cooling.
//!
//! Fitness is maximized here. A challenger that is at least as fit as the parent
//! is always accepted; a worse one is accepted with probability `exp(−Δ/T)` where
//! `Δ = F_parent − F_challenger > 0`.

use rand::Rng;

use crate::error::{Error, Result};

/// Temperatures below this are pinned to it.
pub const T_MIN: f64 = 1e-8;

/// Geometric cooling schedule `T_n = max(T_init·αⁿ, T_MIN)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealState {
    t_init: f64,
    alpha: f64,
    t_current: f64,
    iteration: u64,
}

impl AnnealState {
    pub fn new(t_init: f64, alpha: f64) -> Result<Self> {
        if !(t_init.is_finite() && t_init > 0.0) {
            return Err(Error::argument(format!("initial temperature must be positive, got {t_init}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::argument(format!("alpha must lie in (0,1], got {alpha}")));
        }
        Ok(Self {
            t_init,
            alpha,
            t_current: t_init.max(T_MIN),
            iteration: 0,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.t_current
    }

    pub fn t_init(&self) -> f64 {
        self.t_init
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// One cooling step. The temperature is recomputed from the closed form so
    /// that no rounding accumulates over long runs.
    #[must_use]
    pub fn cool(self) -> Self {
        let iteration = self.iteration + 1;
        let t = self.t_init * self.alpha.powf(iteration as f64);
        Self {
            iteration,
            t_current: t.max(T_MIN),
            ..self
        }
    }
}

/// `exp(−max(0, f_parent − f_challenger)/T)`.
pub fn metropolis_probability(f_parent: f64, f_challenger: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::argument(format!("temperature must be positive, got {temperature}")));
    }
    if !f_parent.is_finite() || !f_challenger.is_finite() {
        return Err(Error::Numeric("fitness passed to the Metropolis test".into()));
    }
    let delta = (f_parent - f_challenger).max(0.0);
    Ok((-delta / temperature).exp())
}

/// Outcome of one uniform draw against an acceptance probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptDraw {
    pub draw: f64,
    pub accepted: bool,
}

/// Draws `γ ~ U[0,1)` and accepts iff `γ < p`. Exactly one draw is consumed.
pub fn accept<R: Rng + ?Sized>(probability: f64, rng: &mut R) -> AcceptDraw {
    let draw: f64 = rng.random();
    AcceptDraw {
        draw,
        accepted: draw < probability,
    }
}

/// Full trace of one Metropolis decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetropolisDecision {
    pub delta: f64,
    pub probability: f64,
    pub draw: f64,
    pub accepted: bool,
}

/// Computes `Δ` and `P`, then draws. Improvements (`Δ = 0`) are accepted even
/// though a draw is still consumed, which keeps the random stream aligned across
/// runs that differ only in temperature.
pub fn metropolis<R: Rng + ?Sized>(
    f_parent: f64,
    f_challenger: f64,
    temperature: f64,
    rng: &mut R,
) -> Result<MetropolisDecision> {
    let probability = metropolis_probability(f_parent, f_challenger, temperature)?;
    let AcceptDraw { draw, accepted } = accept(probability, rng);
    Ok(MetropolisDecision {
        delta: (f_parent - f_challenger).max(0.0),
        probability,
        draw,
        accepted: accepted || f_challenger >= f_parent,
    })
}
