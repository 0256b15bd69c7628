//! Generative sequence and classification models with both Bayesian classifier
//! constructions.

pub mod alphabet;
pub mod data;
pub mod error;
pub mod estimation;
pub mod inference;
pub mod metrics;
pub mod model;
pub mod prob;
pub mod sequence;
pub mod synth;
pub mod verify;

pub use alphabet::{Alphabet, LabelSet, ObsSet};
pub use error::{Error, Result, Violation};
pub use sequence::{LabeledSequence, Observations};
