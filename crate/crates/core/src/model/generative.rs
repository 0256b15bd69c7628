use serde::{Deserialize, Serialize};

use super::ModelKind;
use crate::alphabet::{LabelSet, ObsSet};
use crate::error::{Error, Result};
use crate::sequence::LabeledSequence;

pub type Table2 = Vec<Vec<f64>>;
pub type Table3 = Vec<Vec<Vec<f64>>>;
pub type Table4 = Vec<Vec<Vec<Vec<f64>>>>;

/// Conditional probability tables, one variant per model kind. The last index of every
/// table is the variable being generated; earlier indices are its conditioning values in
/// the order written in the field docs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "tables")]
pub enum GenerativeTables {
    #[serde(rename = "nb")]
    NaiveBayes {
        /// `p(x)` `[N]`
        prior: Vec<f64>,
        /// `p(y_t | x)` `[N][M]`
        emission: Table2,
    },
    #[serde(rename = "pooledmc")]
    PooledMc {
        prior: Vec<f64>,
        /// `p(y_1 | x)` `[N][M]`
        first: Table2,
        /// `p(y_{t+1} | x, y_t)` `[N][M][M]`
        next: Table3,
    },
    #[serde(rename = "pooledmc2")]
    PooledMc2 {
        prior: Vec<f64>,
        /// `p(y_1 | x)` `[N][M]`
        first: Table2,
        /// `p(y_2 | x, y_1)` `[N][M][M]`
        second: Table3,
        /// `p(y_{t+2} | x, y_t, y_{t+1})` `[N][M][M][M]`
        next: Table4,
    },
    #[serde(rename = "hmc")]
    Hmc {
        /// `p(x_1)` `[N]`
        initial: Vec<f64>,
        /// `p(x_{t+1} | x_t)` `[N][N]`
        transition: Table2,
        /// `p(y_t | x_t)` `[N][M]`
        emission: Table2,
    },
    #[serde(rename = "hmc2")]
    Hmc2 {
        initial: Vec<f64>,
        /// `p(x_2 | x_1)` `[N][N]`
        transition: Table2,
        /// `p(x_{t+2} | x_t, x_{t+1})` `[N][N][N]`
        transition2: Table3,
        emission: Table2,
    },
    #[serde(rename = "hmcplus")]
    HmcPlus {
        initial: Vec<f64>,
        transition: Table2,
        /// `p(y_1 | x_1)` `[N][M]`
        first_emission: Table2,
        /// `p(y_{t+1} | x_t, x_{t+1})` `[N][N][M]`
        emission: Table3,
    },
}

impl GenerativeTables {
    pub fn kind(&self) -> ModelKind {
        match self {
            GenerativeTables::NaiveBayes { .. } => ModelKind::NaiveBayes,
            GenerativeTables::PooledMc { .. } => ModelKind::PooledMc,
            GenerativeTables::PooledMc2 { .. } => ModelKind::PooledMc2,
            GenerativeTables::Hmc { .. } => ModelKind::Hmc,
            GenerativeTables::Hmc2 { .. } => ModelKind::Hmc2,
            GenerativeTables::HmcPlus { .. } => ModelKind::HmcPlus,
        }
    }

    /// `p(x)` for the naive Bayes family, `p(x_1)` for the HMC family.
    pub fn prior(&self) -> &[f64] {
        match self {
            GenerativeTables::NaiveBayes { prior, .. }
            | GenerativeTables::PooledMc { prior, .. }
            | GenerativeTables::PooledMc2 { prior, .. } => prior,
            GenerativeTables::Hmc { initial, .. }
            | GenerativeTables::Hmc2 { initial, .. }
            | GenerativeTables::HmcPlus { initial, .. } => initial,
        }
    }
}

/// A time-homogeneous generative model over discrete labels and observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeModel {
    pub labels: LabelSet,
    pub observations: ObsSet,
    pub tables: GenerativeTables,
}

impl GenerativeModel {
    pub fn new(labels: LabelSet, observations: ObsSet, tables: GenerativeTables) -> Self {
        GenerativeModel {
            labels,
            observations,
            tables,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.tables.kind()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.observations.len()
    }

    /// Checks that observation symbols are in range and `y` is non-empty.
    pub fn check_observations(&self, y: &[usize]) -> Result<()> {
        check_symbols(y, self.num_symbols())
    }

    /// Checks a labeled sequence against the alphabets and the kind's label layout.
    pub fn check_sequence(&self, seq: &LabeledSequence) -> Result<()> {
        let y = seq
            .observations
            .symbols()
            .ok_or_else(|| Error::Shape("generative models need discrete observations".into()))?;
        self.check_observations(y)?;
        check_labels(&seq.labels, self.kind(), y.len(), self.num_labels())
    }
}

pub(crate) fn check_symbols(y: &[usize], m: usize) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Shape("observation sequence is empty".into()));
    }
    if let Some((t, &s)) = y.iter().enumerate().find(|(_, &s)| s >= m) {
        return Err(Error::Alphabet(format!(
            "observation {s} at position {} is outside an alphabet of size {m}",
            t + 1
        )));
    }
    Ok(())
}

pub(crate) fn check_labels(x: &[usize], kind: ModelKind, t_len: usize, n: usize) -> Result<()> {
    let expected = if kind.is_sequential() { t_len } else { 1 };
    if x.len() != expected {
        return Err(Error::Shape(format!(
            "{kind} sequence of length {t_len} needs {expected} labels, got {}",
            x.len()
        )));
    }
    if let Some(&l) = x.iter().find(|&&l| l >= n) {
        return Err(Error::Alphabet(format!(
            "label {l} is outside an alphabet of size {n}"
        )));
    }
    Ok(())
}
