use super::{GenerativeModel, GenerativeTables};
use crate::error::{Error, Result};
use crate::prob::ln;
use crate::sequence::LabeledSequence;

/// Natural log of the joint probability `p(x, y)` under the model's factorization.
/// Returns `-inf` when any factor is zero.
pub fn joint_log_prob(model: &GenerativeModel, seq: &LabeledSequence) -> Result<f64> {
    model.check_sequence(seq)?;
    let y = seq.observations.symbols().ok_or_else(|| {
        Error::Shape("generative models need discrete observations".into())
    })?;
    Ok(joint_log_prob_unchecked(&model.tables, &seq.labels, y))
}

/// As [`joint_log_prob`] on pre-validated indices.
pub(crate) fn joint_log_prob_unchecked(tables: &GenerativeTables, x: &[usize], y: &[usize]) -> f64 {
    let t_len = y.len();
    let mut lp = 0.0;
    match tables {
        GenerativeTables::NaiveBayes { prior, emission } => {
            let c = x[0];
            lp += ln(prior[c]);
            for &s in y {
                lp += ln(emission[c][s]);
            }
        }
        GenerativeTables::PooledMc { prior, first, next } => {
            let c = x[0];
            lp += ln(prior[c]) + ln(first[c][y[0]]);
            for t in 1..t_len {
                lp += ln(next[c][y[t - 1]][y[t]]);
            }
        }
        GenerativeTables::PooledMc2 {
            prior,
            first,
            second,
            next,
        } => {
            let c = x[0];
            lp += ln(prior[c]) + ln(first[c][y[0]]);
            if t_len > 1 {
                lp += ln(second[c][y[0]][y[1]]);
            }
            for t in 2..t_len {
                lp += ln(next[c][y[t - 2]][y[t - 1]][y[t]]);
            }
        }
        GenerativeTables::Hmc {
            initial,
            transition,
            emission,
        } => {
            lp += ln(initial[x[0]]);
            for t in 1..t_len {
                lp += ln(transition[x[t - 1]][x[t]]);
            }
            for t in 0..t_len {
                lp += ln(emission[x[t]][y[t]]);
            }
        }
        GenerativeTables::Hmc2 {
            initial,
            transition,
            transition2,
            emission,
        } => {
            lp += ln(initial[x[0]]);
            if t_len > 1 {
                lp += ln(transition[x[0]][x[1]]);
            }
            for t in 2..t_len {
                lp += ln(transition2[x[t - 2]][x[t - 1]][x[t]]);
            }
            for t in 0..t_len {
                lp += ln(emission[x[t]][y[t]]);
            }
        }
        GenerativeTables::HmcPlus {
            initial,
            transition,
            first_emission,
            emission,
        } => {
            lp += ln(initial[x[0]]) + ln(first_emission[x[0]][y[0]]);
            for t in 1..t_len {
                lp += ln(transition[x[t - 1]][x[t]]) + ln(emission[x[t - 1]][x[t]][y[t]]);
            }
        }
    }
    lp
}

pub(crate) fn chain_log_prob(initial: &[f64], transition: &[Vec<f64>], x: &[usize]) -> f64 {
    let mut lp = ln(initial[x[0]]);
    for w in x.windows(2) {
        lp += ln(transition[w[0]][w[1]]);
    }
    lp
}

pub(crate) fn chain2_log_prob(
    initial: &[f64],
    transition: &[Vec<f64>],
    transition2: &[Vec<Vec<f64>>],
    x: &[usize],
) -> f64 {
    let mut lp = ln(initial[x[0]]);
    if x.len() > 1 {
        lp += ln(transition[x[0]][x[1]]);
    }
    for w in x.windows(3) {
        lp += ln(transition2[w[0]][w[1]][w[2]]);
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    fn nb_example() -> GenerativeModel {
        GenerativeModel::new(
            Alphabet::new(["a", "b"]).unwrap(),
            Alphabet::new(["u", "v"]).unwrap(),
            GenerativeTables::NaiveBayes {
                prior: vec![0.6, 0.4],
                emission: vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            },
        )
    }

    #[test]
    fn nb_example_joint() {
        let m = nb_example();
        let lp = joint_log_prob(&m, &LabeledSequence::new(vec![0], vec![0, 1])).unwrap();
        assert!((lp - 0.126f64.ln()).abs() < 1e-12);
        let lp = joint_log_prob(&m, &LabeledSequence::new(vec![1], vec![0, 1])).unwrap();
        assert!((lp - 0.064f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_factor_gives_neg_infinity() {
        let mut m = nb_example();
        if let GenerativeTables::NaiveBayes { emission, .. } = &mut m.tables {
            emission[0] = vec![1.0, 0.0];
        }
        let lp = joint_log_prob(&m, &LabeledSequence::new(vec![0], vec![0, 1])).unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
    }

    #[test]
    fn hmc_single_step() {
        let m = GenerativeModel::new(
            Alphabet::numbered("s", 2),
            Alphabet::numbered("o", 3),
            GenerativeTables::Hmc {
                initial: vec![0.3, 0.7],
                transition: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
                emission: vec![vec![0.5, 0.25, 0.25], vec![0.1, 0.1, 0.8]],
            },
        );
        let lp = joint_log_prob(&m, &LabeledSequence::new(vec![1], vec![2])).unwrap();
        assert!((lp - (0.7f64.ln() + 0.8f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_sequences() {
        let m = nb_example();
        assert!(joint_log_prob(&m, &LabeledSequence::new(vec![0, 1], vec![0, 1])).is_err());
        assert!(joint_log_prob(&m, &LabeledSequence::new(vec![0], vec![0, 2])).is_err());
        assert!(joint_log_prob(&m, &LabeledSequence::new(vec![2], vec![0])).is_err());
    }
}
