//! Smoothed count estimation of both parameterizations and gradient training of feature
//! heads.

mod counts;
mod head;

pub use counts::{fit_discriminative_tables, fit_generative, CountAccumulator, CountTensor};
pub use head::{numerical_gradient, train_feature_head, train_head, LossRecord, TrainedHeads};

use crate::error::{Error, Result};

/// Where the HMC-family marginals `p(x_t)` of fitted units come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarginalEstimate {
    /// Label frequency over the population each posterior unit was counted on.
    #[default]
    Empirical,
    /// Propagated through the fitted initial and transition tables, position by position.
    Chain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Additive smoothing for every count table.
    pub smoothing_alpha: f64,
    pub learning_rate: f64,
    /// Zero leaves heads at their all-zero initialization.
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Heavy-ball momentum coefficient; 0 gives plain gradient descent.
    pub momentum: f64,
    pub marginals: MarginalEstimate,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            smoothing_alpha: 1.0,
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            momentum: 0.9,
            marginals: MarginalEstimate::Empirical,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.smoothing_alpha >= 0.0 && self.smoothing_alpha.is_finite()) {
            return Err(Error::Config(format!(
                "smoothing_alpha must be a finite value ≥ 0, got {}",
                self.smoothing_alpha
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be ≥ 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
