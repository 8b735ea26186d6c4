//! Domain-adversarial transfer learning for regression soft sensors.
//!
//! The model couples three small dense networks: a feature extractor shared by
//! a regression head and a domain discriminator. Training descends the
//! regression loss while a gradient-reversal stage makes the extractor ascend
//! the discriminator's loss, pulling source-domain and target-domain feature
//! distributions together so a regressor fitted on labeled source data keeps
//! working on an unlabeled target domain.
//!
//! The crate is IO-free and `no_std`-compatible (`alloc` required; disable the
//! `std` feature and enable `libm` for the math fallback). File formats, the
//! CLI, and wall-clock timing live in the companion `dannr-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("enable either the `std` or the `libm` feature");

pub mod data;
pub mod eval;
pub mod fleet;
mod fmath;
pub mod layer;
pub mod matrix;
pub mod model;
pub mod schedule;
pub mod seeds;
pub mod tape;
pub mod trainer;

use alloc::string::String;

pub use data::{Dataset, DomainLabel, NormStats, Sample};
pub use eval::{EvalReport, FleetAverage, MatrixMode};
pub use fleet::{BaseFunction, FleetSpec, PlantPerturbation};
pub use layer::{Activation, DenseLayer};
pub use matrix::Matrix;
pub use model::{DannrModel, ModelGrads, ModelShape};
pub use schedule::LambdaSchedule;
pub use tape::{GradientSet, Tape};
pub use trainer::{EpochRecord, TrainConfig, TrainTrace};

/// Errors shared by every module in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two shapes that must agree do not (vector lengths, layer dimensions).
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A configuration value is outside its documented range.
    #[error("invalid config: {0}")]
    Config(String),
    /// An operation was called before its prerequisite.
    #[error("invalid state: {0}")]
    State(String),
    /// A data argument violates a precondition.
    #[error("invalid input: {0}")]
    Input(String),
    /// A numeric guard tripped on a value that should be impossible.
    #[error("numeric guard: {0}")]
    Numeric(String),
    /// Training hit a non-finite loss; the position is reported so the run
    /// can be diagnosed from its seed and config.
    #[error("non-finite {quantity} at epoch {epoch}, batch {batch}")]
    NonFinite {
        quantity: &'static str,
        epoch: usize,
        batch: usize,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
