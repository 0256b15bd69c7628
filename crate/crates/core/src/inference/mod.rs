//! Bayesian classifiers in both constructions, plus the enumeration oracle.
//!
//! The generative construction reads `p(y | x)` tables from a [`GenerativeModel`]; the
//! discriminative construction reads only priors and posterior units from
//! [`DiscriminativeUnits`]. Both return the same argmax when the units come from
//! [`bayes_invert`](crate::model::bayes_invert); their scores differ by `log κ(y)`.

mod extended;
mod hmc;
mod lattice;
mod naive;
mod oracle;
mod ratios;

use std::fmt;
use std::str::FromStr;

pub use extended::{hmc2_mpm, hmc2_viterbi, hmcplus_mpm, hmcplus_mpm_with, hmcplus_viterbi};
pub use hmc::{hmc_efb_mpm, hmc_efb_mpm_with, hmc_fb_mpm, hmc_viterbi, EfbOutput, Scaling};
pub use naive::{
    class_posterior, class_scores, classify, nb_classify_discriminative, nb_classify_generative,
    pooledmc2_classify, pooledmc_classify,
};
pub use oracle::{brute_force_map, brute_force_marginals, brute_force_posterior, ENUMERATION_GUARD};
pub use ratios::{discriminative_log_weight, PairForm};

use crate::error::{Error, Result};
use crate::model::{DiscriminativeUnits, GenerativeModel, ModelKind};
use crate::prob::Categorical;
use crate::sequence::Observations;

/// How a classifier is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Generative,
    Discriminative,
}

impl FromStr for Construction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "generative" => Ok(Construction::Generative),
            "discriminative" => Ok(Construction::Discriminative),
            _ => Err(format!("unknown construction `{s}`")),
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Generative => "generative",
            Construction::Discriminative => "discriminative",
        })
    }
}

/// The parameterization a classifier runs on; the variant selects the construction.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Generative(&'a GenerativeModel),
    Discriminative(&'a DiscriminativeUnits),
}

impl<'a> Source<'a> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Source::Generative(m) => m.kind(),
            Source::Discriminative(u) => u.kind(),
        }
    }

    pub fn construction(&self) -> Construction {
        match self {
            Source::Generative(_) => Construction::Generative,
            Source::Discriminative(_) => Construction::Discriminative,
        }
    }

    pub fn num_labels(&self) -> usize {
        match self {
            Source::Generative(m) => m.num_labels(),
            Source::Discriminative(u) => u.num_labels(),
        }
    }

    fn expect_kind(&self, expected: &[ModelKind]) -> Result<()> {
        let kind = self.kind();
        if expected.contains(&kind) {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: expected
                    .iter()
                    .map(|k| k.name())
                    .collect::<Vec<_>>()
                    .join(" or "),
                found: kind,
            })
        }
    }

    /// Checks `obs` and returns the symbol view for the generative construction.
    fn check<'o>(&self, obs: &'o Observations) -> Result<Option<&'o [usize]>> {
        match self {
            Source::Generative(m) => {
                let y = obs.symbols().ok_or_else(|| {
                    Error::Shape("the generative construction needs discrete observations".into())
                })?;
                m.check_observations(y)?;
                Ok(Some(y))
            }
            Source::Discriminative(u) => {
                u.check_observations(obs)?;
                Ok(None)
            }
        }
    }
}

impl<'a> From<&'a GenerativeModel> for Source<'a> {
    fn from(m: &'a GenerativeModel) -> Self {
        Source::Generative(m)
    }
}

impl<'a> From<&'a DiscriminativeUnits> for Source<'a> {
    fn from(u: &'a DiscriminativeUnits) -> Self {
        Source::Discriminative(u)
    }
}

/// Output of a classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub labels: Vec<usize>,
    /// Log-domain objective of the chosen labels. Not comparable across constructions.
    pub score: f64,
    /// Number of argmax ties (see [`crate::prob::tied`]) resolved to the lowest label index.
    pub ties_broken: usize,
}

/// `p(x_t | y_{1:T})` for every position.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMarginals {
    pub positions: Vec<Categorical>,
}

impl PosteriorMarginals {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Per-position argmax (the MPM decision).
    pub fn decode(&self) -> DecodeResult {
        let mut labels = Vec::with_capacity(self.positions.len());
        let mut score = 0.0;
        let mut ties_broken = 0;
        for p in &self.positions {
            let (best, ties) = crate::prob::argmax(p.probs());
            labels.push(best);
            score += crate::prob::ln(p.probs()[best]);
            ties_broken += ties;
        }
        DecodeResult {
            labels,
            score,
            ties_broken,
        }
    }

    /// Largest absolute difference between corresponding entries.
    pub fn max_abs_diff(&self, other: &PosteriorMarginals) -> f64 {
        self.positions
            .iter()
            .zip(&other.positions)
            .flat_map(|(a, b)| a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Decision rule for sequence models. The naive Bayes family has a single hidden label, for
/// which both rules are the class argmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Jointly most probable labels (Viterbi).
    Map,
    /// Per-position most probable label.
    #[default]
    Mpm,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "map" => Ok(Algorithm::Map),
            "mpm" => Ok(Algorithm::Mpm),
            _ => Err(format!("unknown algorithm `{s}`")),
        }
    }
}

/// Posterior marginals for any kind: the class posterior for the naive Bayes family, FB or
/// EFB for HMC, and the pair-state recursions for HMC2 and HMC+.
pub fn posterior(source: Source<'_>, obs: &Observations) -> Result<PosteriorMarginals> {
    Ok(match source.kind() {
        ModelKind::NaiveBayes | ModelKind::PooledMc | ModelKind::PooledMc2 => PosteriorMarginals {
            positions: vec![class_posterior(source, obs)?],
        },
        ModelKind::Hmc => match source {
            Source::Generative(m) => hmc_fb_mpm(m, obs)?.0,
            Source::Discriminative(u) => hmc_efb_mpm(u, obs)?.0,
        },
        ModelKind::Hmc2 => hmc2_mpm(source, obs)?.0,
        ModelKind::HmcPlus => hmcplus_mpm(source, obs)?.0,
    })
}

/// Labels for `obs` under either construction and decision rule.
pub fn predict(source: Source<'_>, obs: &Observations, algorithm: Algorithm) -> Result<DecodeResult> {
    match (source.kind(), algorithm) {
        (ModelKind::NaiveBayes | ModelKind::PooledMc | ModelKind::PooledMc2, _) => classify(source, obs),
        (_, Algorithm::Mpm) => Ok(posterior(source, obs)?.decode()),
        (ModelKind::Hmc, Algorithm::Map) => hmc_viterbi(source, obs),
        (ModelKind::Hmc2, Algorithm::Map) => hmc2_viterbi(source, obs),
        (ModelKind::HmcPlus, Algorithm::Map) => hmcplus_viterbi(source, obs),
    }
}
