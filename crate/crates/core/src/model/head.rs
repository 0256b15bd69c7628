use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{log_sum_exp, softmax};

/// Linear softmax head: `softmax(W f + b)` over `K` outputs for a `d`-dimensional feature
/// vector `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHead {
    pub d: usize,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Gradient of the mean cross-entropy with respect to `W` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradient {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl FeatureHead {
    /// All-zero head with uniform output.
    pub fn zeros(outputs: usize, d: usize) -> Self {
        FeatureHead {
            d,
            w: vec![vec![0.0; d]; outputs],
            b: vec![0.0; outputs],
        }
    }

    pub fn outputs(&self) -> usize {
        self.b.len()
    }

    pub fn logits(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.d {
            return Err(Error::Shape(format!(
                "feature head expects dimension {}, got {}",
                self.d,
                f.len()
            )));
        }
        Ok(self
            .w
            .iter()
            .zip(&self.b)
            .map(|(row, b)| b + row.iter().zip(f).map(|(w, x)| w * x).sum::<f64>())
            .collect())
    }

    pub fn log_probs(&self, f: &[f64]) -> Result<Vec<f64>> {
        let z = self.logits(f)?;
        let lse = log_sum_exp(&z);
        Ok(z.into_iter().map(|v| v - lse).collect())
    }

    pub fn probs(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(f)?))
    }

    /// Mean cross-entropy of the head against integer targets.
    pub fn loss(&self, batch: &[(&[f64], usize)]) -> Result<f64> {
        let mut total = 0.0;
        for &(f, target) in batch {
            total -= self.log_probs(f)?[target];
        }
        Ok(total / batch.len().max(1) as f64)
    }

    /// Mean cross-entropy and its analytic gradient: `dL/dz_k = p_k - 1[k = target]`.
    pub fn loss_and_gradient(&self, batch: &[(&[f64], usize)]) -> Result<(f64, HeadGradient)> {
        let k = self.outputs();
        let mut grad = HeadGradient {
            w: vec![vec![0.0; self.d]; k],
            b: vec![0.0; k],
        };
        let mut total = 0.0;
        let scale = 1.0 / batch.len().max(1) as f64;
        for &(f, target) in batch {
            let lp = self.log_probs(f)?;
            total -= lp[target];
            for (j, &l) in lp.iter().enumerate() {
                let mut delta = l.exp();
                if j == target {
                    delta -= 1.0;
                }
                delta *= scale;
                grad.b[j] += delta;
                for (g, &x) in grad.w[j].iter_mut().zip(f) {
                    *g += delta * x;
                }
            }
        }
        Ok((total * scale, grad))
    }
}
