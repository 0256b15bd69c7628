use super::rng::{derive_seed, Rng};
use crate::error::{Error, Result};
use crate::model::{GenerativeModel, GenerativeTables};
use crate::sequence::LabeledSequence;

/// Ancestral draw of one sequence with `t_len` observations, in the factorization order of
/// the model's law.
pub fn sample(model: &GenerativeModel, t_len: usize, rng: &mut Rng) -> Result<LabeledSequence> {
    if t_len == 0 {
        return Err(Error::Shape("sequence length must be ≥ 1".into()));
    }
    let mut y = Vec::with_capacity(t_len);
    let labels = match &model.tables {
        GenerativeTables::NaiveBayes { prior, emission } => {
            let x = rng.categorical(prior);
            for _ in 0..t_len {
                y.push(rng.categorical(&emission[x]));
            }
            vec![x]
        }
        GenerativeTables::PooledMc { prior, first, next } => {
            let x = rng.categorical(prior);
            y.push(rng.categorical(&first[x]));
            for t in 1..t_len {
                y.push(rng.categorical(&next[x][y[t - 1]]));
            }
            vec![x]
        }
        GenerativeTables::PooledMc2 {
            prior,
            first,
            second,
            next,
        } => {
            let x = rng.categorical(prior);
            y.push(rng.categorical(&first[x]));
            if t_len > 1 {
                y.push(rng.categorical(&second[x][y[0]]));
            }
            for t in 2..t_len {
                y.push(rng.categorical(&next[x][y[t - 2]][y[t - 1]]));
            }
            vec![x]
        }
        GenerativeTables::Hmc {
            initial,
            transition,
            emission,
        } => {
            let mut x = vec![rng.categorical(initial)];
            for t in 1..t_len {
                x.push(rng.categorical(&transition[x[t - 1]]));
            }
            for &s in &x {
                y.push(rng.categorical(&emission[s]));
            }
            x
        }
        GenerativeTables::Hmc2 {
            initial,
            transition,
            transition2,
            emission,
        } => {
            let mut x = vec![rng.categorical(initial)];
            if t_len > 1 {
                x.push(rng.categorical(&transition[x[0]]));
            }
            for t in 2..t_len {
                x.push(rng.categorical(&transition2[x[t - 2]][x[t - 1]]));
            }
            for &s in &x {
                y.push(rng.categorical(&emission[s]));
            }
            x
        }
        GenerativeTables::HmcPlus {
            initial,
            transition,
            first_emission,
            emission,
        } => {
            let mut x = vec![rng.categorical(initial)];
            for t in 1..t_len {
                x.push(rng.categorical(&transition[x[t - 1]]));
            }
            y.push(rng.categorical(&first_emission[x[0]]));
            for t in 1..t_len {
                y.push(rng.categorical(&emission[x[t - 1]][x[t]]));
            }
            x
        }
    };
    Ok(LabeledSequence::new(labels, y))
}

/// `num` sequences of length `t_len`; sequence `i` uses the stream `derive_seed(seed, i)`,
/// so any subset can be regenerated independently.
pub fn sample_corpus(model: &GenerativeModel, num: usize, t_len: usize, seed: u64) -> Result<Vec<LabeledSequence>> {
    (0..num)
        .map(|i| sample(model, t_len, &mut Rng::new(derive_seed(seed, i as u64))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::prob::total_variation;

    fn nb() -> GenerativeModel {
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
    fn deterministic_model_gives_unique_sequence() {
        let model = GenerativeModel::new(
            Alphabet::numbered("s", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::Hmc {
                initial: vec![0.0, 1.0],
                transition: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
                emission: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            },
        );
        let s = sample(&model, 5, &mut Rng::new(9)).unwrap();
        assert_eq!(s.labels, vec![1, 0, 1, 0, 1]);
        assert_eq!(s.observations.symbols().unwrap(), &[1, 0, 1, 0, 1]);
    }

    #[test]
    fn absorbing_state_is_kept() {
        let model = GenerativeModel::new(
            Alphabet::numbered("s", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::Hmc {
                initial: vec![0.5, 0.5],
                transition: vec![vec![0.5, 0.5], vec![0.0, 1.0]],
                emission: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            },
        );
        for seed in 0..50 {
            let s = sample(&model, 12, &mut Rng::new(seed)).unwrap();
            if let Some(k) = s.labels.iter().position(|&l| l == 1) {
                assert!(s.labels[k..].iter().all(|&l| l == 1));
            }
        }
    }

    #[test]
    fn nb_emission_frequencies_converge() {
        let mut rng = Rng::new(11);
        let mut counts = [[0.0f64; 2]; 2];
        for _ in 0..100_000 {
            let s = sample(&nb(), 1, &mut rng).unwrap();
            counts[s.labels[0]][s.observations.symbols().unwrap()[0]] += 1.0;
        }
        let truth = [[0.7, 0.3], [0.2, 0.8]];
        for x in 0..2 {
            let total = counts[x][0] + counts[x][1];
            let emp = [counts[x][0] / total, counts[x][1] / total];
            assert!(total_variation(&emp, &truth[x]) <= 0.02);
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = sample_corpus(&nb(), 20, 4, 5).unwrap();
        let b = sample_corpus(&nb(), 20, 4, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_corpus(&nb(), 20, 4, 6).unwrap());
        assert!(sample(&nb(), 0, &mut Rng::new(0)).is_err());
    }
}
