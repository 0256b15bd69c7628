//! Both parameterizations of the six models.
//!
//! A [`GenerativeModel`] stores the conditional tables of the joint law `p(x, y)`. A
//! [`DiscriminativeUnits`] stores only what the discriminative construction consumes: the
//! structural prior over labels plus posterior units `p(A_x | y_t, A_y)` and their
//! denominators `p(A_x | A_y)`. [`bayes_invert`] converts the former into the latter exactly.

mod generative;
mod head;
mod invert;
mod io;
mod joint;
mod kappa;
mod units;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use generative::{GenerativeModel, GenerativeTables, Table2, Table3, Table4};
pub use head::{FeatureHead, HeadGradient};
pub use invert::{bayes_invert, chain_marginals, hmc2_marginals};
pub use io::{ModelFile, SCHEMA_VERSION};
pub use joint::joint_log_prob;
pub use kappa::{kappa_log, Kappa};
pub use units::{DiscriminativeUnits, Unit, UnitSet, UnitTable};
pub use validate::{validate_generative, validate_units, Validate};

pub(crate) use generative::{check_labels as check_label_layout, check_symbols};
pub(crate) use joint::{chain2_log_prob, chain_log_prob, joint_log_prob_unchecked};

/// Which row of the model zoo a parameterization realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// `p(x) ∏ p(y_t|x)`
    #[serde(rename = "nb")]
    NaiveBayes,
    /// `p(x) p(y_1|x) ∏ p(y_{t+1}|x, y_t)`
    #[serde(rename = "pooledmc")]
    PooledMc,
    /// `p(x) p(y_1|x) p(y_2|x, y_1) ∏ p(y_{t+2}|x, y_t, y_{t+1})`
    #[serde(rename = "pooledmc2")]
    PooledMc2,
    /// `p(x_1) ∏ p(x_{t+1}|x_t) ∏ p(y_t|x_t)`
    #[serde(rename = "hmc")]
    Hmc,
    /// `p(x_1) p(x_2|x_1) ∏ p(x_{t+2}|x_t, x_{t+1}) ∏ p(y_t|x_t)`
    #[serde(rename = "hmc2")]
    Hmc2,
    /// `p(x_1) ∏ p(x_{t+1}|x_t) p(y_1|x_1) ∏ p(y_{t+1}|x_t, x_{t+1})`
    #[serde(rename = "hmcplus")]
    HmcPlus,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::NaiveBayes,
        ModelKind::PooledMc,
        ModelKind::PooledMc2,
        ModelKind::Hmc,
        ModelKind::Hmc2,
        ModelKind::HmcPlus,
    ];

    /// True for the HMC family, where every position carries its own hidden label.
    pub fn is_sequential(self) -> bool {
        matches!(self, ModelKind::Hmc | ModelKind::Hmc2 | ModelKind::HmcPlus)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "nb",
            ModelKind::PooledMc => "pooledmc",
            ModelKind::PooledMc2 => "pooledmc2",
            ModelKind::Hmc => "hmc",
            ModelKind::Hmc2 => "hmc2",
            ModelKind::HmcPlus => "hmcplus",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown model kind `{s}`"))
    }
}
