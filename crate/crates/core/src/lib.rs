//! Annealing genetic GAN training.
//!
//! The generator is treated as an individual evolving against the discriminator:
//! each iteration spawns offspring under several adversarial objectives, keeps the
//! fittest, and adopts it through a Metropolis test under a cooling temperature.
//! The crate also contains a finite-state simulator of that chain and a
//! class-imbalance benchmark built on generator-based oversampling.

pub mod annealing;
pub mod bench;
pub mod error;
pub mod losses;
pub mod nn;
pub mod seeding;
pub mod theory;
pub mod trainer;

pub use error::{Error, Result};
