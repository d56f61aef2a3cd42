//! Dense-network numerical engine: matrices, MLP forward/backward, optimizers and
//! checkpoints.

pub mod checkpoint;
mod matrix;
mod mlp;
mod optim;

pub use matrix::RealMatrix;
pub use mlp::{
    backward, forward, grad_norm, GradSet, HiddenActivation, Layer, MlpSpec, OutputActivation,
    ParamSet, Tape, DEFAULT_LEAKY_SLOPE, PROB_EPS,
};
pub use optim::{OptState, OptimizerKind};
