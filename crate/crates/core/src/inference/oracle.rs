//! Exact posteriors by enumerating every hidden configuration.

use super::{DecodeResult, PosteriorMarginals};
use crate::error::{Error, Result};
use crate::model::{joint_log_prob_unchecked, GenerativeModel};
use crate::prob::{log_sum_exp, softmax, Categorical};

/// Largest number of hidden configurations the oracle will enumerate.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// Log joint `log p(x, y)` of every hidden configuration, in row-major order with the
/// first hidden variable most significant.
fn enumerate(model: &GenerativeModel, y: &[usize]) -> Result<(usize, Vec<f64>)> {
    model.check_observations(y)?;
    let n = model.num_labels();
    let len = if model.kind().is_sequential() { y.len() } else { 1 };
    let states = (n as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if states > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            states,
            limit: ENUMERATION_GUARD,
        });
    }
    let mut x = vec![0usize; len];
    let mut out = Vec::with_capacity(states as usize);
    for _ in 0..states {
        out.push(joint_log_prob_unchecked(&model.tables, &x, y));
        for v in x.iter_mut().rev() {
            *v += 1;
            if *v < n {
                break;
            }
            *v = 0;
        }
    }
    Ok((len, out))
}

fn digits(mut index: usize, n: usize, len: usize) -> Vec<usize> {
    let mut x = vec![0; len];
    for v in x.iter_mut().rev() {
        *v = index % n;
        index /= n;
    }
    x
}

fn check_evidence(log_joint: &[f64]) -> Result<f64> {
    let z = log_sum_exp(log_joint);
    if z == f64::NEG_INFINITY {
        Err(Error::ZeroObservation { position: 0 })
    } else {
        Ok(z)
    }
}

/// `p(x_H | y)` over `Λ^{|H|}` (row-major in the order of `positions`). Positions are
/// 0-based hidden indices; naive Bayes family models have the single hidden index 0.
pub fn brute_force_posterior(model: &GenerativeModel, y: &[usize], positions: &[usize]) -> Result<Categorical> {
    let (len, log_joint) = enumerate(model, y)?;
    if let Some(&bad) = positions.iter().find(|&&h| h >= len) {
        return Err(Error::Shape(format!("hidden position {bad} outside 0..{len}")));
    }
    check_evidence(&log_joint)?;
    let n = model.num_labels();
    let post = softmax(&log_joint);
    let mut out = vec![0.0; n.pow(positions.len() as u32)];
    for (index, p) in post.iter().enumerate() {
        let x = digits(index, n, len);
        let k = positions.iter().fold(0, |acc, &h| acc * n + x[h]);
        out[k] += p;
    }
    Ok(Categorical::new(out))
}

/// `p(x_t | y)` for every hidden position.
pub fn brute_force_marginals(model: &GenerativeModel, y: &[usize]) -> Result<PosteriorMarginals> {
    let (len, log_joint) = enumerate(model, y)?;
    check_evidence(&log_joint)?;
    let n = model.num_labels();
    let post = softmax(&log_joint);
    let mut marg = vec![vec![0.0; n]; len];
    for (index, p) in post.iter().enumerate() {
        for (t, &v) in digits(index, n, len).iter().enumerate() {
            marg[t][v] += p;
        }
    }
    Ok(PosteriorMarginals {
        positions: marg.into_iter().map(Categorical::new).collect(),
    })
}

/// Jointly most probable hidden configuration. Among tied configurations (see
/// [`crate::prob::tied`]) the one with the smallest last label wins, then the smallest
/// second-to-last, and so on; this is the choice Viterbi backtracking makes. The score is
/// `log p(x, y)`.
pub fn brute_force_map(model: &GenerativeModel, y: &[usize]) -> Result<DecodeResult> {
    let (len, log_joint) = enumerate(model, y)?;
    check_evidence(&log_joint)?;
    let n = model.num_labels();
    let top = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<Vec<usize>> = log_joint
        .iter()
        .enumerate()
        .filter(|&(_, &v)| crate::prob::tied(v, top))
        .map(|(k, _)| digits(k, n, len))
        .collect();
    let ties = tied.len() - 1;
    tied.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    let labels = tied.swap_remove(0);
    let score = joint_log_prob_unchecked(&model.tables, &labels, y);
    Ok(DecodeResult {
        labels,
        score,
        ties_broken: ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::inference::{class_posterior, hmc_fb_mpm};
    use crate::model::GenerativeTables;

    fn hmc() -> GenerativeModel {
        GenerativeModel::new(
            Alphabet::numbered("s", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::Hmc {
                initial: vec![0.25, 0.75],
                transition: vec![vec![0.6, 0.4], vec![0.3, 0.7]],
                emission: vec![vec![0.9, 0.1], vec![0.35, 0.65]],
            },
        )
    }

    #[test]
    fn single_position_is_normalized_joint() {
        let p = brute_force_posterior(&hmc(), &[1], &[0]).unwrap();
        let w = [0.25 * 0.1, 0.75 * 0.65];
        assert!((p.probs()[0] - w[0] / (w[0] + w[1])).abs() < 1e-15);
    }

    #[test]
    fn middle_position_matches_forward_backward() {
        let y = [0, 1, 0];
        let p = brute_force_posterior(&hmc(), &y, &[1]).unwrap();
        let (fb, _) = hmc_fb_mpm(&hmc(), &y.to_vec().into()).unwrap();
        assert!((p.probs()[0] - fb.positions[1].probs()[0]).abs() < 1e-12);
    }

    #[test]
    fn nb_class_posterior() {
        let model = GenerativeModel::new(
            Alphabet::new(["a", "b"]).unwrap(),
            Alphabet::new(["u", "v"]).unwrap(),
            GenerativeTables::NaiveBayes {
                prior: vec![0.6, 0.4],
                emission: vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            },
        );
        let p = brute_force_posterior(&model, &[0, 1], &[0]).unwrap();
        let q = class_posterior((&model).into(), &vec![0, 1].into()).unwrap();
        assert!((p.probs()[0] - 0.126 / 0.19).abs() < 1e-12);
        assert!((p.probs()[1] - q.probs()[1]).abs() < 1e-12);
    }

    #[test]
    fn joint_posterior_sums_to_one() {
        let p = brute_force_posterior(&hmc(), &[0, 1, 1], &[0, 2]).unwrap();
        assert_eq!(p.len(), 4);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guard_is_enforced() {
        let y = vec![0; 30];
        assert!(matches!(
            brute_force_marginals(&hmc(), &y),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn exact_ties_break_like_viterbi() {
        use crate::inference::{hmc2_viterbi, hmc_viterbi, Source};
        let uniform = vec![vec![0.5, 0.5]; 2];
        let alternating = vec![vec![0.1, 0.9], vec![0.9, 0.1]];
        let m = GenerativeModel::new(
            Alphabet::numbered("s", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::Hmc {
                initial: vec![0.5, 0.5],
                transition: alternating.clone(),
                emission: uniform.clone(),
            },
        );
        let y: crate::sequence::Observations = vec![0, 1, 1, 0].into();
        let best = brute_force_map(&m, y.symbols().unwrap()).unwrap();
        assert_eq!(best.labels, vec![1, 0, 1, 0]);
        assert_eq!(best.ties_broken, 1);
        assert_eq!(hmc_viterbi(Source::Generative(&m), &y).unwrap().labels, best.labels);
        let m2 = GenerativeModel::new(
            m.labels.clone(),
            m.observations.clone(),
            GenerativeTables::Hmc2 {
                initial: vec![0.5, 0.5],
                transition: alternating.clone(),
                transition2: vec![alternating.clone(); 2],
                emission: uniform,
            },
        );
        assert_eq!(hmc2_viterbi(Source::Generative(&m2), &y).unwrap().labels, best.labels);
        assert_eq!(brute_force_map(&m2, y.symbols().unwrap()).unwrap().labels, best.labels);
    }
}
