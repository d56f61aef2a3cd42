//! SGD and Adam parameter updates.

use super::mlp::{GradSet, ParamSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    pub const fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Optimizer hyper-parameters plus the running moments for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub kind: OptimizerKind,
    pub lr: f64,
    first: Option<GradSet>,
    second: Option<GradSet>,
    step: u64,
}

impl OptState {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        Self {
            kind,
            lr,
            first: None,
            second: None,
            step: 0,
        }
    }

    pub fn sgd(lr: f64) -> Self {
        Self::new(OptimizerKind::Sgd, lr)
    }

    pub fn adam(lr: f64) -> Self {
        Self::new(OptimizerKind::adam(), lr)
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update to `params` in place. Nothing is modified when the
    /// gradients contain a non-finite entry.
    pub fn step(&mut self, params: &mut ParamSet, grads: &GradSet) -> Result<()> {
        if params.layers.len() != grads.layers.len()
            || params
                .arrays()
                .zip(grads.arrays())
                .any(|((_, p), (_, g))| p.len() != g.len())
        {
            return Err(Error::Shape("gradients are not congruent with parameters".into()));
        }
        if let Some((name, _)) = grads.arrays().find(|(_, g)| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::Numeric(format!("gradient array {name}")));
        }
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, (_, g)) in params.arrays_mut().zip(grads.arrays()) {
                    for (pi, gi) in p.iter_mut().zip(g) {
                        *pi -= self.lr * gi;
                    }
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let m = self.first.get_or_insert_with(|| params.zeros_like());
                let v = self.second.get_or_insert_with(|| params.zeros_like());
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                let lr = self.lr;
                for (((p, (_, g)), m), v) in params
                    .arrays_mut()
                    .zip(grads.arrays())
                    .zip(m.arrays_mut())
                    .zip(v.arrays_mut())
                {
                    for i in 0..p.len() {
                        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}
