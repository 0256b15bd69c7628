//! Probability vectors and log-domain helpers.

use serde::{Deserialize, Serialize};

/// Tolerance on the sum of a probability vector.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A distribution over a finite index set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Categorical {
    probs: Vec<f64>,
}

impl Categorical {
    /// Wraps `probs` without checking; see [`check_distribution`].
    pub fn new(probs: Vec<f64>) -> Self {
        Categorical { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Categorical {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Normalizes non-negative weights. All-zero weights give the uniform distribution.
    pub fn from_weights(weights: &[f64]) -> Self {
        Categorical {
            probs: normalize(weights),
        }
    }

    /// Builds a normalized distribution from unnormalized log weights.
    pub fn from_log_weights(log_weights: &[f64]) -> Self {
        Categorical {
            probs: softmax(log_weights),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs).0
    }

    pub fn is_valid(&self) -> bool {
        check_distribution(&self.probs).is_none()
    }
}

/// Returns a description of the first failed constraint, or `None` when `p` is a valid
/// distribution.
pub fn check_distribution(p: &[f64]) -> Option<String> {
    if p.is_empty() {
        return Some("empty distribution".into());
    }
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() {
            return Some(format!("entry {i} is not finite ({v})"));
        }
        if v < 0.0 {
            return Some(format!("entry {i} is negative ({v})"));
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Some(format!("row sum {sum} ≠ 1"));
    }
    None
}

pub fn normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    }
}

/// `ln(x)` with `ln(0) = -inf`, the absorbing zero of log space.
#[inline]
pub fn ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Numerically stable `ln(sum(exp(xs)))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Exponential normalization of log weights. All `-inf` input gives the uniform distribution.
pub fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(log_weights);
    if !z.is_finite() {
        return vec![1.0 / log_weights.len() as f64; log_weights.len()];
    }
    log_weights.iter().map(|&w| (w - z).exp()).collect()
}

/// Relative tolerance under which two scores count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// `a` and `b` agree within [`TIE_TOLERANCE`], relative to the larger magnitude (and at
/// least 1). Equal infinities are tied.
pub fn tied(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0))
}

/// Returns `(index, ties)` of the maximum. Values tied with the maximum (see [`tied`]) count
/// as equal: the lowest such index wins and `ties` counts the others. Rounding noise between
/// two computations of the same scores therefore cannot change the choice.
pub fn argmax(xs: &[f64]) -> (usize, usize) {
    let best = xs.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let mut chosen = None;
    let mut ties = 0;
    for (i, &v) in xs.iter().enumerate() {
        if tied(v, best) {
            if chosen.is_none() {
                chosen = Some(i);
            } else {
                ties += 1;
            }
        }
    }
    (chosen.unwrap_or(0), ties)
}

/// Total-variation distance between two distributions on the same index set.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), (1, 1));
        assert_eq!(argmax(&[0.5, 0.5, 0.5]), (0, 2));
        assert_eq!(argmax(&[f64::NEG_INFINITY, -1.0]), (1, 0));
        assert_eq!(argmax(&[2.0, 2.0 + 1e-12, 1.0]), (0, 1));
        assert!(!tied(f64::NEG_INFINITY, -1.0));
    }

    #[test]
    fn log_sum_exp_handles_neg_infinity() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[0.0, f64::NEG_INFINITY]);
        assert!((v - 0.0).abs() < 1e-15);
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn check_distribution_reports_row_sum() {
        let msg = check_distribution(&[0.5, 0.6]).unwrap();
        assert!(msg.contains("row sum 1.1"), "{msg}");
        assert!(check_distribution(&[0.25, 0.75]).is_none());
        assert!(check_distribution(&[-0.1, 1.1]).unwrap().contains("negative"));
    }

    #[test]
    fn softmax_of_all_neg_infinity_is_uniform() {
        assert_eq!(softmax(&[f64::NEG_INFINITY; 4]), vec![0.25; 4]);
    }
}
