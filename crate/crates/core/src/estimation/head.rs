use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CountAccumulator, TrainConfig};
use crate::alphabet::LabelSet;
use crate::error::{Error, Result};
use crate::model::{check_label_layout, DiscriminativeUnits, FeatureHead, HeadGradient, ModelKind, Unit};
use crate::sequence::{LabeledSequence, Observations};
use crate::synth::derive_seed;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossRecord {
    pub unit: &'static str,
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedHeads {
    pub units: DiscriminativeUnits,
    /// Mean cross-entropy over each unit's full training set, at initialization (epoch 0)
    /// and after every epoch.
    pub trace: Vec<LossRecord>,
}

type Examples = Vec<(Vec<f64>, usize)>;

fn concat(f: &[Vec<f64>]) -> Vec<f64> {
    f.iter().flatten().copied().collect()
}

/// Training pairs `(input features, target output)` per posterior unit, in the order of
/// [`UnitSet::posterior_units`](crate::model::UnitSet::posterior_units).
fn unit_examples(kind: ModelKind, n: usize, data: &[LabeledSequence]) -> Result<Vec<Examples>> {
    let count = match kind {
        ModelKind::NaiveBayes | ModelKind::Hmc | ModelKind::Hmc2 => 1,
        ModelKind::PooledMc => 3,
        ModelKind::PooledMc2 => 5,
        ModelKind::HmcPlus => 2,
    };
    let mut out: Vec<Examples> = vec![Vec::new(); count];
    for seq in data {
        let f = seq.observations.features().ok_or_else(|| {
            Error::Shape("feature heads are trained on feature-vector observations".into())
        })?;
        let x = &seq.labels;
        let t_len = f.len();
        match kind {
            ModelKind::NaiveBayes => {
                for v in f {
                    out[0].push((v.clone(), x[0]));
                }
            }
            ModelKind::PooledMc => {
                out[0].push((f[0].clone(), x[0]));
                for t in 1..t_len {
                    out[1].push((concat(&f[t - 1..=t]), x[0]));
                    out[2].push((f[t - 1].clone(), x[0]));
                }
            }
            ModelKind::PooledMc2 => {
                out[0].push((f[0].clone(), x[0]));
                if t_len > 1 {
                    out[1].push((concat(&f[0..2]), x[0]));
                    out[2].push((f[0].clone(), x[0]));
                }
                for t in 2..t_len {
                    out[3].push((concat(&f[t - 2..=t]), x[0]));
                    out[4].push((concat(&f[t - 2..t]), x[0]));
                }
            }
            ModelKind::Hmc | ModelKind::Hmc2 => {
                for t in 0..t_len {
                    out[0].push((f[t].clone(), x[t]));
                }
            }
            ModelKind::HmcPlus => {
                out[0].push((f[0].clone(), x[0]));
                for t in 1..t_len {
                    out[1].push((f[t].clone(), x[t - 1] * n + x[t]));
                }
            }
        }
    }
    Ok(out)
}

/// Mini-batch gradient descent with heavy-ball momentum from an all-zero head.
pub fn train_head(
    unit: &'static str,
    outputs: usize,
    d: usize,
    examples: &[(Vec<f64>, usize)],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(FeatureHead, Vec<LossRecord>)> {
    cfg.check()?;
    let mut head = FeatureHead::zeros(outputs, d);
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    if examples.is_empty() {
        return Ok((head, trace));
    }
    let all: Vec<(&[f64], usize)> = examples.iter().map(|(f, y)| (f.as_slice(), *y)).collect();
    let record = |head: &FeatureHead, epoch: usize| -> Result<LossRecord> {
        let loss = head.loss(&all)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                unit: unit.to_string(),
                epoch,
                loss,
            });
        }
        Ok(LossRecord { unit, epoch, loss })
    };
    trace.push(record(&head, 0)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..all.len()).collect();
    let mut vel = HeadGradient {
        w: vec![vec![0.0; d]; outputs],
        b: vec![0.0; outputs],
    };
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| all[i]));
            let (loss, grad) = head.loss_and_gradient(&batch)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    unit: unit.to_string(),
                    epoch,
                    loss,
                });
            }
            for k in 0..outputs {
                vel.b[k] = cfg.momentum * vel.b[k] - cfg.learning_rate * grad.b[k];
                head.b[k] += vel.b[k];
                for j in 0..d {
                    vel.w[k][j] = cfg.momentum * vel.w[k][j] - cfg.learning_rate * grad.w[k][j];
                    head.w[k][j] += vel.w[k][j];
                }
            }
        }
        trace.push(record(&head, epoch)?);
    }
    Ok((head, trace))
}

/// Trains one feature head per posterior unit; structural tables (priors, transitions and
/// marginals) are counted from the labels alone. Each unit is trained independently as a
/// classifier on its own contexts.
pub fn train_feature_head(
    kind: ModelKind,
    labels: &LabelSet,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
) -> Result<TrainedHeads> {
    cfg.check()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = labels.len();
    let mut d = None;
    let mut structure = CountAccumulator::new(kind, n, 1);
    for (s, seq) in data.iter().enumerate() {
        let f = seq.observations.features().ok_or_else(|| {
            Error::Shape("feature heads are trained on feature-vector observations".into())
        })?;
        if f.is_empty() {
            return Err(Error::Shape(format!("sequence {} is empty", s + 1)));
        }
        check_label_layout(&seq.labels, kind, f.len(), n)?;
        let dim = *d.get_or_insert(f[0].len());
        if let Some(t) = f.iter().position(|v| v.len() != dim) {
            return Err(Error::Shape(format!(
                "sequence {}, position {}: feature dimension {} (expected {dim})",
                s + 1,
                t + 1,
                f[t].len()
            )));
        }
        structure.add(&LabeledSequence {
            labels: seq.labels.clone(),
            observations: Observations::Symbols(vec![0; f.len()]),
        })?;
    }
    let d = d.expect("non-empty data");
    let mut units = structure.unit_set(cfg.smoothing_alpha, cfg.marginals)?;
    let examples = unit_examples(kind, n, data)?;
    let specs: Vec<(&'static str, usize, usize)> = units
        .posterior_units()
        .into_iter()
        .map(|(name, unit, order)| (name, unit.outputs(), order))
        .collect();
    let mut trace = Vec::new();
    for (k, (unit, ((name, outputs, order), ex))) in units
        .posterior_units_mut()
        .into_iter()
        .zip(specs.into_iter().zip(&examples))
        .enumerate()
    {
        let (head, t) = train_head(name, outputs, d * order, ex, cfg, derive_seed(cfg.seed, k as u64))?;
        *unit = Unit::Head(head);
        trace.extend(t);
    }
    Ok(TrainedHeads {
        units: DiscriminativeUnits {
            labels: labels.clone(),
            observations: None,
            units,
        },
        trace,
    })
}

/// Central finite-difference gradient of the mean cross-entropy.
pub fn numerical_gradient(head: &FeatureHead, batch: &[(&[f64], usize)], h: f64) -> Result<HeadGradient> {
    let mut probe = head.clone();
    let mut grad = HeadGradient {
        w: vec![vec![0.0; head.d]; head.outputs()],
        b: vec![0.0; head.outputs()],
    };
    for k in 0..head.outputs() {
        for j in 0..head.d {
            let w0 = head.w[k][j];
            probe.w[k][j] = w0 + h;
            let up = probe.loss(batch)?;
            probe.w[k][j] = w0 - h;
            let down = probe.loss(batch)?;
            probe.w[k][j] = w0;
            grad.w[k][j] = (up - down) / (2.0 * h);
        }
        let b0 = head.b[k];
        probe.b[k] = b0 + h;
        let up = probe.loss(batch)?;
        probe.b[k] = b0 - h;
        let down = probe.loss(batch)?;
        probe.b[k] = b0;
        grad.b[k] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}
