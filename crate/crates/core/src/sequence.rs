//! Labeled sequences.
//!
//! Positions are written 1-based in documentation (`y_1 .. y_T`) and stored 0-based, so
//! `y_t` lives at index `t - 1`.

use serde::{Deserialize, Serialize};

/// Observations of a sequence: discrete symbol indices or real feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observations {
    Symbols(Vec<usize>),
    Features(Vec<Vec<f64>>),
}

impl Observations {
    pub fn len(&self) -> usize {
        match self {
            Observations::Symbols(s) => s.len(),
            Observations::Features(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn symbols(&self) -> Option<&[usize]> {
        match self {
            Observations::Symbols(s) => Some(s),
            Observations::Features(_) => None,
        }
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        match self {
            Observations::Features(f) => Some(f),
            Observations::Symbols(_) => None,
        }
    }
}

impl From<Vec<usize>> for Observations {
    fn from(s: Vec<usize>) -> Self {
        Observations::Symbols(s)
    }
}

impl From<Vec<Vec<f64>>> for Observations {
    fn from(f: Vec<Vec<f64>>) -> Self {
        Observations::Features(f)
    }
}

/// `(x, y_{1:T})`: one label per position for the HMC family, a single class label for the
/// naive Bayes family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSequence {
    pub labels: Vec<usize>,
    pub observations: Observations,
}

impl LabeledSequence {
    pub fn new(labels: Vec<usize>, observations: impl Into<Observations>) -> Self {
        LabeledSequence {
            labels,
            observations: observations.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}
