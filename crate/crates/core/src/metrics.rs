//! Accuracy and per-label precision, recall and F1 from aligned prediction and gold files.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::data::{Record, Tokens};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelStats {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: u64,
    /// Times the label was predicted.
    pub predicted: u64,
    /// Times the label is the gold answer.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub correct: u64,
    /// Labeled decisions compared: one per token for tagged data, one per document.
    pub total: u64,
    pub sequences: u64,
    pub tokens: u64,
    pub per_label: BTreeMap<String, LabelStats>,
}

fn misaligned(sequence: usize, token: usize, message: impl Into<String>) -> Error {
    Error::Misaligned {
        sequence,
        token,
        message: message.into(),
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Compares predictions with gold labels. The files must hold the same sequences with the
/// same tokens; the first divergence is reported (1-based sequence and token). Precision,
/// recall or F1 with an empty denominator are 0.
pub fn evaluate(pred: &[Record], gold: &[Record]) -> Result<MetricsReport> {
    if pred.len() != gold.len() {
        let k = pred.len().min(gold.len());
        return Err(misaligned(
            k + 1,
            0,
            format!("prediction file has {} sequences, gold has {}", pred.len(), gold.len()),
        ));
    }
    let mut correct = 0;
    let mut total = 0;
    let mut tokens = 0;
    let mut tp: BTreeMap<String, u64> = BTreeMap::new();
    let mut predicted: BTreeMap<String, u64> = BTreeMap::new();
    let mut support: BTreeMap<String, u64> = BTreeMap::new();
    for (s, (p, g)) in pred.iter().zip(gold).enumerate() {
        let seq = s + 1;
        match (&p.tokens, &g.tokens) {
            (Tokens::Symbols(a), Tokens::Symbols(b)) => {
                if let Some(t) = a.iter().zip(b).position(|(x, y)| x != y) {
                    return Err(misaligned(seq, t + 1, format!("token `{}` vs gold `{}`", a[t], b[t])));
                }
                if a.len() != b.len() {
                    return Err(misaligned(
                        seq,
                        a.len().min(b.len()) + 1,
                        format!("{} tokens vs gold {}", a.len(), b.len()),
                    ));
                }
            }
            (Tokens::Features(a), Tokens::Features(b)) if a.len() == b.len() => {}
            _ => return Err(misaligned(seq, 1, "observations differ in kind or length")),
        }
        tokens += g.tokens.len() as u64;
        let pl = p.labels.as_ref().ok_or_else(|| misaligned(seq, 0, "prediction has no labels"))?;
        let gl = g.labels.as_ref().ok_or_else(|| misaligned(seq, 0, "gold has no labels"))?;
        if pl.len() != gl.len() {
            return Err(misaligned(seq, 0, format!("{} predicted labels vs {} gold", pl.len(), gl.len())));
        }
        for (a, b) in pl.iter().zip(gl) {
            total += 1;
            *predicted.entry(a.clone()).or_default() += 1;
            *support.entry(b.clone()).or_default() += 1;
            if a == b {
                correct += 1;
                *tp.entry(a.clone()).or_default() += 1;
            }
        }
    }
    let names: std::collections::BTreeSet<&String> = predicted.keys().chain(support.keys()).collect();
    let per_label = names
        .into_iter()
        .map(|name| {
            let t = tp.get(name).copied().unwrap_or(0);
            let p = predicted.get(name).copied().unwrap_or(0);
            let s = support.get(name).copied().unwrap_or(0);
            let precision = ratio(t, p);
            let recall = ratio(t, s);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            (
                name.clone(),
                LabelStats {
                    precision,
                    recall,
                    f1,
                    true_positives: t,
                    predicted: p,
                    support: s,
                },
            )
        })
        .collect();
    Ok(MetricsReport {
        accuracy: ratio(correct, total),
        correct,
        total,
        sequences: gold.len() as u64,
        tokens,
        per_label,
    })
}
