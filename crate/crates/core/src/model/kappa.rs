use super::{chain_marginals, hmc2_marginals, GenerativeModel, GenerativeTables};
use crate::error::Result;
use crate::prob::ln;

/// `log κ(y) = -Σ_t log p(y_t | A_y^t)`, the label-independent factor between the joint and
/// the discriminative product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    /// `+inf` when some observation has zero probability.
    pub log_kappa: f64,
    /// First 0-based position whose observation probability is zero.
    pub zero_observation: Option<usize>,
}

impl Kappa {
    pub fn is_finite(&self) -> bool {
        self.zero_observation.is_none()
    }
}

/// Computes `log κ(y)` from the joint law, with each `p(y_t | A_y^t)` taken at its position.
pub fn kappa_log(model: &GenerativeModel, y: &[usize]) -> Result<Kappa> {
    model.check_observations(y)?;
    let per_position = observation_conditionals(model, y);
    let mut log_kappa = 0.0;
    let mut zero_observation = None;
    for (t, p) in per_position.into_iter().enumerate() {
        if p <= 0.0 && zero_observation.is_none() {
            zero_observation = Some(t);
        }
        log_kappa -= ln(p);
    }
    Ok(Kappa {
        log_kappa,
        zero_observation,
    })
}

/// `p(y_t | A_y^t)` for every position.
fn observation_conditionals(model: &GenerativeModel, y: &[usize]) -> Vec<f64> {
    let n = model.num_labels();
    let m = model.num_symbols();
    let t_len = y.len();
    let labels = 0..n;
    match &model.tables {
        GenerativeTables::NaiveBayes { prior, emission } => y
            .iter()
            .map(|&s| labels.clone().map(|x| prior[x] * emission[x][s]).sum())
            .collect(),
        GenerativeTables::PooledMc { prior, first, next } => {
            let mut out = Vec::with_capacity(t_len);
            // obs[x][a] = p(y_t = a | x) at the current predecessor position
            let mut obs = first.clone();
            out.push(labels.clone().map(|x| prior[x] * first[x][y[0]]).sum());
            for t in 1..t_len {
                let (a, b) = (y[t - 1], y[t]);
                let num: f64 = labels.clone().map(|x| prior[x] * obs[x][a] * next[x][a][b]).sum();
                let den: f64 = labels.clone().map(|x| prior[x] * obs[x][a]).sum();
                out.push(num / den);
                obs = (0..n)
                    .map(|x| {
                        (0..m)
                            .map(|c| (0..m).map(|p| obs[x][p] * next[x][p][c]).sum())
                            .collect()
                    })
                    .collect();
            }
            out
        }
        GenerativeTables::PooledMc2 {
            prior,
            first,
            second,
            next,
        } => {
            let mut out = Vec::with_capacity(t_len);
            out.push(labels.clone().map(|x| prior[x] * first[x][y[0]]).sum());
            if t_len > 1 {
                let (a, b) = (y[0], y[1]);
                let num: f64 = labels
                    .clone()
                    .map(|x| prior[x] * first[x][a] * second[x][a][b])
                    .sum();
                let den: f64 = labels.clone().map(|x| prior[x] * first[x][a]).sum();
                out.push(num / den);
            }
            // pair[x][a][b] = p(y_{t-2} = a, y_{t-1} = b | x)
            let mut pair: Vec<Vec<Vec<f64>>> = (0..n)
                .map(|x| {
                    (0..m)
                        .map(|a| (0..m).map(|b| first[x][a] * second[x][a][b]).collect())
                        .collect()
                })
                .collect();
            for t in 2..t_len {
                let (a, b, c) = (y[t - 2], y[t - 1], y[t]);
                let num: f64 = labels
                    .clone()
                    .map(|x| prior[x] * pair[x][a][b] * next[x][a][b][c])
                    .sum();
                let den: f64 = labels.clone().map(|x| prior[x] * pair[x][a][b]).sum();
                out.push(num / den);
                let mut nxt = vec![vec![vec![0.0; m]; m]; n];
                for (x, block) in nxt.iter_mut().enumerate() {
                    for p in 0..m {
                        for q in 0..m {
                            for r in 0..m {
                                block[q][r] += pair[x][p][q] * next[x][p][q][r];
                            }
                        }
                    }
                }
                pair = nxt;
            }
            out
        }
        GenerativeTables::Hmc {
            initial,
            transition,
            emission,
        } => {
            let marg = chain_marginals(initial, transition, t_len);
            emission_marginals(&marg, emission, y)
        }
        GenerativeTables::Hmc2 {
            initial,
            transition,
            transition2,
            emission,
        } => {
            let marg = hmc2_marginals(initial, transition, transition2, t_len);
            emission_marginals(&marg, emission, y)
        }
        GenerativeTables::HmcPlus {
            initial,
            transition,
            first_emission,
            emission,
        } => {
            let marg = chain_marginals(initial, transition, t_len);
            let mut out = vec![labels.clone().map(|x| initial[x] * first_emission[x][y[0]]).sum()];
            for t in 1..t_len {
                let mut p = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        p += marg[t - 1][i] * transition[i][j] * emission[i][j][y[t]];
                    }
                }
                out.push(p);
            }
            out
        }
    }
}

fn emission_marginals(marg: &[Vec<f64>], emission: &[Vec<f64>], y: &[usize]) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(t, &s)| marg[t].iter().zip(emission).map(|(p, e)| p * e[s]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;

    #[test]
    fn nb_example_kappa() {
        let model = GenerativeModel::new(
            Alphabet::new(["a", "b"]).unwrap(),
            Alphabet::new(["u", "v"]).unwrap(),
            GenerativeTables::NaiveBayes {
                prior: vec![0.6, 0.4],
                emission: vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            },
        );
        // p(u) = 0.6·0.7 + 0.4·0.2 = 0.5, p(v) = 0.5
        let k = kappa_log(&model, &[0, 1]).unwrap();
        assert!((k.log_kappa + 0.25f64.ln()).abs() < 1e-12);
        let k = kappa_log(&model, &[0]).unwrap();
        assert!((k.log_kappa + 0.5f64.ln()).abs() < 1e-12);
        assert!(k.is_finite());
    }

    #[test]
    fn impossible_observation_is_flagged() {
        let model = GenerativeModel::new(
            Alphabet::numbered("s", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::NaiveBayes {
                prior: vec![0.5, 0.5],
                emission: vec![vec![1.0, 0.0], vec![1.0, 0.0]],
            },
        );
        let k = kappa_log(&model, &[0, 1, 1]).unwrap();
        assert_eq!(k.zero_observation, Some(1));
        assert_eq!(k.log_kappa, f64::INFINITY);
    }
}
