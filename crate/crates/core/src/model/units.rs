use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{FeatureHead, ModelKind, Table2};
use crate::alphabet::{LabelSet, ObsSet};
use crate::error::{Error, Result};
use crate::prob::ln;
use crate::sequence::Observations;

/// A posterior unit stored as explicit tables over discrete observation contexts.
///
/// `positions[k][c][o]` is the probability of output `o` given context `c` at the `k`-th
/// position the unit is used at. Sequences longer than `positions` reuse the last entry,
/// so a time-homogeneous unit has exactly one position. Context `c` is the row-major index
/// of the `order` conditioning observations, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTable {
    pub order: usize,
    pub positions: Vec<Table2>,
}

impl UnitTable {
    pub fn homogeneous(order: usize, rows: Table2) -> Self {
        UnitTable {
            order,
            positions: vec![rows],
        }
    }

    pub fn at(&self, k: usize) -> &Table2 {
        &self.positions[k.min(self.positions.len() - 1)]
    }

    pub fn outputs(&self) -> usize {
        self.positions
            .first()
            .and_then(|p| p.first())
            .map_or(0, Vec::len)
    }
}

/// A posterior unit `p(A_x | y-context)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Table(UnitTable),
    /// Input is the concatenation of the context's feature vectors, oldest first.
    Head(FeatureHead),
}

impl Unit {
    pub fn outputs(&self) -> usize {
        match self {
            Unit::Table(t) => t.outputs(),
            Unit::Head(h) => h.outputs(),
        }
    }

    /// Log-probabilities over outputs at the `k`-th use of the unit, conditioned on the
    /// observations in `context`.
    pub fn log_probs(
        &self,
        k: usize,
        obs: &Observations,
        context: Range<usize>,
        num_symbols: usize,
    ) -> Result<Vec<f64>> {
        match self {
            Unit::Table(table) => {
                let y = obs.symbols().ok_or_else(|| {
                    Error::Shape("table units need discrete observations".into())
                })?;
                if context.len() != table.order {
                    return Err(Error::Shape(format!(
                        "unit of order {} evaluated on a context of {} observations",
                        table.order,
                        context.len()
                    )));
                }
                let c = context_index(&y[context], num_symbols);
                let row = table.at(k).get(c).ok_or_else(|| {
                    Error::Shape(format!("context {c} outside the unit table"))
                })?;
                Ok(row.iter().map(|&p| ln(p)).collect())
            }
            Unit::Head(head) => {
                let f = obs.features().ok_or_else(|| {
                    Error::Shape("feature heads need feature-vector observations".into())
                })?;
                let input: Vec<f64> = f[context].iter().flatten().copied().collect();
                head.log_probs(&input)
            }
        }
    }
}

/// Row-major index of a symbol tuple, oldest first.
pub(crate) fn context_index(symbols: &[usize], m: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * m + s)
}

/// The ingredients of the discriminative construction, one variant per model kind.
///
/// Naive Bayes family: `prior` is the structural `p(x)`; `marginal` is the denominator of the
/// first position's ratio (and of every position for plain naive Bayes). For an exact
/// inversion both are `p(x)`; fitted units may use the label frequency of the population the
/// posterior was counted on.
///
/// Unit offsets (the first 0-based position each unit is used at): `posterior` and `first`
/// at 0; `pair` and `previous` at 1; `triple` and `previous_pair` at 2. In `HmcPlus`,
/// `first` is `p(x_1|y_1)` over `N` outputs and `pair` is `p(x_{t-1}, x_t | y_t)` over `N²`
/// outputs (index `i * N + j`) starting at position 1. `marginals[t]` is `p(x_t)`;
/// `pair_marginals[k]` is `p(x_{k}, x_{k+1})` (0-based), both reusing their last entry for
/// longer sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "units")]
pub enum UnitSet {
    #[serde(rename = "nb")]
    NaiveBayes {
        prior: Vec<f64>,
        marginal: Vec<f64>,
        /// `p(x | y_t)`
        posterior: Unit,
    },
    #[serde(rename = "pooledmc")]
    PooledMc {
        prior: Vec<f64>,
        marginal: Vec<f64>,
        /// `p(x | y_1)`
        first: Unit,
        /// `p(x | y_{t-1}, y_t)`
        pair: Unit,
        /// `p(x | y_{t-1})`
        previous: Unit,
    },
    #[serde(rename = "pooledmc2")]
    PooledMc2 {
        prior: Vec<f64>,
        marginal: Vec<f64>,
        first: Unit,
        /// `p(x | y_1, y_2)`
        pair: Unit,
        /// `p(x | y_1)` as the denominator at position 2
        previous: Unit,
        /// `p(x | y_{t-2}, y_{t-1}, y_t)`
        triple: Unit,
        /// `p(x | y_{t-2}, y_{t-1})`
        previous_pair: Unit,
    },
    #[serde(rename = "hmc")]
    Hmc {
        initial: Vec<f64>,
        transition: Table2,
        marginals: Table2,
        /// `p(x_t | y_t)`
        posterior: Unit,
    },
    #[serde(rename = "hmc2")]
    Hmc2 {
        initial: Vec<f64>,
        transition: Table2,
        transition2: Vec<Table2>,
        marginals: Table2,
        posterior: Unit,
    },
    #[serde(rename = "hmcplus")]
    HmcPlus {
        initial: Vec<f64>,
        transition: Table2,
        marginals: Table2,
        pair_marginals: Vec<Table2>,
        first: Unit,
        pair: Unit,
    },
}

impl UnitSet {
    pub fn kind(&self) -> ModelKind {
        match self {
            UnitSet::NaiveBayes { .. } => ModelKind::NaiveBayes,
            UnitSet::PooledMc { .. } => ModelKind::PooledMc,
            UnitSet::PooledMc2 { .. } => ModelKind::PooledMc2,
            UnitSet::Hmc { .. } => ModelKind::Hmc,
            UnitSet::Hmc2 { .. } => ModelKind::Hmc2,
            UnitSet::HmcPlus { .. } => ModelKind::HmcPlus,
        }
    }

    /// Every posterior unit with its name and conditioning order.
    pub fn posterior_units(&self) -> Vec<(&'static str, &Unit, usize)> {
        match self {
            UnitSet::NaiveBayes { posterior, .. } => vec![("posterior", posterior, 1)],
            UnitSet::PooledMc {
                first,
                pair,
                previous,
                ..
            } => vec![("first", first, 1), ("pair", pair, 2), ("previous", previous, 1)],
            UnitSet::PooledMc2 {
                first,
                pair,
                previous,
                triple,
                previous_pair,
                ..
            } => vec![
                ("first", first, 1),
                ("pair", pair, 2),
                ("previous", previous, 1),
                ("triple", triple, 3),
                ("previous_pair", previous_pair, 2),
            ],
            UnitSet::Hmc { posterior, .. } | UnitSet::Hmc2 { posterior, .. } => {
                vec![("posterior", posterior, 1)]
            }
            UnitSet::HmcPlus { first, pair, .. } => vec![("first", first, 1), ("pair", pair, 1)],
        }
    }

    pub fn posterior_units_mut(&mut self) -> Vec<&mut Unit> {
        match self {
            UnitSet::NaiveBayes { posterior, .. } => vec![posterior],
            UnitSet::PooledMc {
                first,
                pair,
                previous,
                ..
            } => vec![first, pair, previous],
            UnitSet::PooledMc2 {
                first,
                pair,
                previous,
                triple,
                previous_pair,
                ..
            } => vec![first, pair, previous, triple, previous_pair],
            UnitSet::Hmc { posterior, .. } | UnitSet::Hmc2 { posterior, .. } => vec![posterior],
            UnitSet::HmcPlus { first, pair, .. } => vec![first, pair],
        }
    }
}

/// Discriminative parameterization of one of the six models.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminativeUnits {
    pub labels: LabelSet,
    /// `None` when every posterior unit is a feature head.
    pub observations: Option<ObsSet>,
    pub units: UnitSet,
}

impl DiscriminativeUnits {
    pub fn kind(&self) -> ModelKind {
        self.units.kind()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.observations.as_ref().map_or(0, ObsSet::len)
    }

    /// Checks observation shape against the units: symbols in range, or feature vectors of a
    /// consistent dimension.
    pub fn check_observations(&self, obs: &Observations) -> Result<()> {
        if obs.is_empty() {
            return Err(Error::Shape("observation sequence is empty".into()));
        }
        match obs {
            Observations::Symbols(y) => {
                if self.observations.is_none() {
                    return Err(Error::Shape(
                        "units without an observation alphabet need feature vectors".into(),
                    ));
                }
                super::generative::check_symbols(y, self.num_symbols())
            }
            Observations::Features(f) => {
                let d = f[0].len();
                if let Some(t) = f.iter().position(|v| v.len() != d) {
                    return Err(Error::Shape(format!(
                        "feature vector at position {} has dimension {} (expected {d})",
                        t + 1,
                        f[t].len()
                    )));
                }
                Ok(())
            }
        }
    }
}
