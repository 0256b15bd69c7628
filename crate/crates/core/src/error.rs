use std::fmt;

use thiserror::Error;

use crate::model::ModelKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("alphabet mismatch: {0}")]
    Alphabet(String),

    #[error("expected a {expected} model, found {found}")]
    KindMismatch { expected: String, found: ModelKind },

    #[error("invalid model:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("bayes inversion failed: unit `{unit}` has a zero denominator at position {position}, index {index}")]
    InversionFailure {
        unit: &'static str,
        position: usize,
        index: usize,
    },

    #[error("zero denominator in unit `{unit}` at position {position}")]
    ZeroDenominator { unit: &'static str, position: usize },

    #[error("observation at position {position} has zero probability under every label configuration")]
    ZeroObservation { position: usize },

    #[error("enumeration of {states} configurations exceeds the guard of {limit}")]
    GuardExceeded { states: u128, limit: u128 },

    #[error("no training data")]
    EmptyData,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite loss {loss} while training `{unit}` at epoch {epoch}")]
    NonFiniteLoss {
        unit: String,
        epoch: usize,
        loss: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("files diverge at sequence {sequence}, token {token}: {message}")]
    Misaligned {
        sequence: usize,
        token: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A failed invariant, reported as data by `validate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub table: String,
    pub index: Vec<usize>,
    pub message: String,
}

impl Violation {
    pub fn new(table: impl Into<String>, index: Vec<usize>, message: impl Into<String>) -> Self {
        Violation {
            table: table.into(),
            index,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}: {}", self.table, self.index, self.message)
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
