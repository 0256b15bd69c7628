//! A featurized classification task on which two-bin quantization loses the class signal.
//!
//! Each class is a mixture of two Gaussian components. Component `k` has the offset `±o`
//! (`o = mix_offset · (+1, …, +1, −1, …, −1)`), and class `c` shifts it by
//! `(c − (n−1)/2) · Δ` with `Δ = separation / √d · (1, …, 1)`. The offset is orthogonal to
//! `Δ`, so a linear head sees a clean one-dimensional signal of size `separation` against
//! `noise`, while the sign of each coordinate is dominated by the offset.

use serde::{Deserialize, Serialize};

use super::rng::Rng;
use crate::alphabet::{Alphabet, LabelSet, ObsSet};
use crate::sequence::LabeledSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTaskConfig {
    pub n_classes: usize,
    pub d: usize,
    pub separation: f64,
    pub noise: f64,
    pub mix_offset: f64,
    pub n_points: usize,
}

impl Default for FeatureTaskConfig {
    fn default() -> Self {
        FeatureTaskConfig {
            n_classes: 2,
            d: 8,
            separation: 2.0,
            noise: 1.0,
            mix_offset: 3.0,
            n_points: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePoint {
    pub label: usize,
    pub vector: Vec<f64>,
    /// Token `j` is `2j + [vector[j] ≥ 0]`.
    pub symbols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTask {
    pub n_classes: usize,
    pub d: usize,
    pub points: Vec<FeaturePoint>,
}

/// Draws `cfg.n_points` points. Panics if `n_classes < 2` or `d < 2`.
pub fn make_feature_task(cfg: &FeatureTaskConfig, rng: &mut Rng) -> FeatureTask {
    assert!(cfg.n_classes >= 2, "n_classes must be ≥ 2");
    assert!(cfg.d >= 2, "d must be ≥ 2");
    let d = cfg.d;
    let half = d / 2;
    // Middle coordinate of an odd d stays 0 to keep the offset orthogonal to Δ.
    let offset: Vec<f64> = (0..d)
        .map(|j| {
            if j < half {
                cfg.mix_offset
            } else if d % 2 == 1 && j == half {
                0.0
            } else {
                -cfg.mix_offset
            }
        })
        .collect();
    let step = cfg.separation / (d as f64).sqrt();
    let centre = (cfg.n_classes as f64 - 1.0) / 2.0;
    let points = (0..cfg.n_points)
        .map(|_| {
            let label = (rng.uniform() * cfg.n_classes as f64) as usize;
            let sign = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
            let shift = (label as f64 - centre) * step;
            let vector: Vec<f64> = offset
                .iter()
                .map(|&o| sign * o + shift + cfg.noise * rng.normal())
                .collect();
            let symbols = vector
                .iter()
                .enumerate()
                .map(|(j, &v)| 2 * j + usize::from(v >= 0.0))
                .collect();
            FeaturePoint {
                label,
                vector,
                symbols,
            }
        })
        .collect();
    FeatureTask {
        n_classes: cfg.n_classes,
        d,
        points,
    }
}

impl FeatureTask {
    pub fn labels(&self) -> LabelSet {
        Alphabet::numbered("c", self.n_classes)
    }

    /// `d{j}-` and `d{j}+` for every coordinate `j`.
    pub fn symbol_set(&self) -> ObsSet {
        Alphabet::new((0..self.d).flat_map(|j| [format!("d{j}-"), format!("d{j}+")]))
            .expect("distinct names")
    }

    /// One document per point with a single feature-vector observation.
    pub fn feature_sequences(&self) -> Vec<LabeledSequence> {
        self.points
            .iter()
            .map(|p| LabeledSequence::new(vec![p.label], vec![p.vector.clone()]))
            .collect()
    }

    /// One document per point with `d` quantized tokens.
    pub fn symbol_sequences(&self) -> Vec<LabeledSequence> {
        self.points
            .iter()
            .map(|p| LabeledSequence::new(vec![p.label], p.symbols.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_symbols() {
        let task = make_feature_task(
            &FeatureTaskConfig {
                n_points: 100,
                ..Default::default()
            },
            &mut Rng::new(4),
        );
        assert_eq!(task.points.len(), 100);
        assert_eq!(task.symbol_set().len(), 16);
        for p in &task.points {
            assert_eq!(p.vector.len(), 8);
            for (j, &s) in p.symbols.iter().enumerate() {
                assert_eq!(s / 2, j);
                assert_eq!(s % 2 == 1, p.vector[j] >= 0.0);
            }
        }
    }

    #[test]
    fn reproducible() {
        let cfg = FeatureTaskConfig::default();
        assert_eq!(
            make_feature_task(&cfg, &mut Rng::new(1)),
            make_feature_task(&cfg, &mut Rng::new(1))
        );
    }

    #[test]
    fn classes_are_balanced() {
        let task = make_feature_task(&FeatureTaskConfig::default(), &mut Rng::new(2));
        let ones = task.points.iter().filter(|p| p.label == 1).count();
        assert!((ones as f64 / 5000.0 - 0.5).abs() < 0.03);
    }
}
