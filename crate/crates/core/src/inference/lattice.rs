//! Log-space sum-product and max-sum over a state lattice with sparse incoming edges.

use crate::error::{Error, Result};
use crate::prob::{log_sum_exp, softmax};

/// `edges[j]` lists `(i, log w)` for every transition into state `j`.
pub(crate) type Step = Vec<Vec<(usize, f64)>>;

pub(crate) struct Lattice {
    /// Log weight of each state at the first lattice position.
    pub start: Vec<f64>,
    /// `steps[k]` connects lattice position `k` to `k + 1`.
    pub steps: Vec<Step>,
}

pub(crate) struct SumProduct {
    /// Normalized state posteriors per lattice position.
    pub posteriors: Vec<Vec<f64>>,
    pub log_alpha: Vec<Vec<f64>>,
    pub log_beta: Vec<Vec<f64>>,
}

pub(crate) struct MaxSum {
    pub states: Vec<usize>,
    pub score: f64,
    pub ties: usize,
}

/// Dense step from an `n × n` log weight matrix `w[i][j]`.
pub(crate) fn dense_step(w: &[Vec<f64>]) -> Step {
    let n = w.len();
    (0..n).map(|j| (0..n).map(|i| (i, w[i][j])).collect()).collect()
}

impl Lattice {
    fn len(&self) -> usize {
        self.steps.len() + 1
    }

    /// `offset` maps lattice positions back to sequence positions in error reports.
    pub fn sum_product(&self, offset: usize) -> Result<SumProduct> {
        let len = self.len();
        let mut log_alpha = Vec::with_capacity(len);
        log_alpha.push(self.start.clone());
        for (k, step) in self.steps.iter().enumerate() {
            let prev = &log_alpha[k];
            let next: Vec<f64> = step
                .iter()
                .map(|edges| {
                    let terms: Vec<f64> = edges.iter().map(|&(i, w)| prev[i] + w).collect();
                    log_sum_exp(&terms)
                })
                .collect();
            log_alpha.push(next);
        }
        for (k, a) in log_alpha.iter().enumerate() {
            if a.iter().all(|&v| v == f64::NEG_INFINITY) {
                return Err(Error::ZeroObservation {
                    position: k + offset,
                });
            }
        }
        let mut log_beta = vec![Vec::new(); len];
        log_beta[len - 1] = vec![0.0; self.start.len()];
        for k in (0..len - 1).rev() {
            let step = &self.steps[k];
            let width = log_alpha[k].len();
            let mut terms = vec![Vec::new(); width];
            for (j, edges) in step.iter().enumerate() {
                for &(i, w) in edges {
                    terms[i].push(w + log_beta[k + 1][j]);
                }
            }
            log_beta[k] = terms.iter().map(|t| log_sum_exp(t)).collect();
        }
        let posteriors = log_alpha
            .iter()
            .zip(&log_beta)
            .map(|(a, b)| {
                let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                softmax(&s)
            })
            .collect();
        Ok(SumProduct {
            posteriors,
            log_alpha,
            log_beta,
        })
    }

    /// Best state path. Ties (see [`crate::prob::tied`]) go to the lowest final state and then
    /// the lowest predecessor index at each step.
    pub fn max_sum(&self, offset: usize) -> Result<MaxSum> {
        let len = self.len();
        let mut delta = self.start.clone();
        let mut back: Vec<Vec<(usize, bool)>> = Vec::with_capacity(len - 1);
        for (k, step) in self.steps.iter().enumerate() {
            let mut next = Vec::with_capacity(step.len());
            let mut ptr = Vec::with_capacity(step.len());
            for edges in step {
                let best = edges.iter().map(|&(i, w)| delta[i] + w).fold(f64::NEG_INFINITY, f64::max);
                let mut arg = None;
                let mut tied = false;
                if best > f64::NEG_INFINITY {
                    for &(i, w) in edges {
                        if crate::prob::tied(delta[i] + w, best) {
                            match arg {
                                None => arg = Some(i),
                                Some(j) => {
                                    tied = true;
                                    arg = Some(j.min(i));
                                }
                            }
                        }
                    }
                }
                let arg = arg.unwrap_or_else(|| edges.first().map_or(0, |e| e.0));
                next.push(best);
                ptr.push((arg, tied));
            }
            if next.iter().all(|&v| v == f64::NEG_INFINITY) {
                return Err(Error::ZeroObservation {
                    position: k + 1 + offset,
                });
            }
            delta = next;
            back.push(ptr);
        }
        if delta.iter().all(|&v| v == f64::NEG_INFINITY) {
            return Err(Error::ZeroObservation { position: offset });
        }
        let (last, final_ties) = crate::prob::argmax(&delta);
        let mut states = vec![0; len];
        states[len - 1] = last;
        let mut ties = final_ties;
        for k in (0..len - 1).rev() {
            let (prev, tied) = back[k][states[k + 1]];
            states[k] = prev;
            ties += usize::from(tied);
        }
        Ok(MaxSum {
            states,
            score: delta[last],
            ties,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Lattice {
        let w = vec![vec![0.9f64.ln(), 0.1f64.ln()], vec![0.2f64.ln(), 0.8f64.ln()]];
        Lattice {
            start: vec![0.5f64.ln(), 0.5f64.ln()],
            steps: vec![dense_step(&w), dense_step(&w)],
        }
    }

    #[test]
    fn sum_product_matches_enumeration() {
        let lat = two_state();
        let sp = lat.sum_product(0).unwrap();
        let w = [[0.9, 0.1], [0.2, 0.8]];
        let mut marg = [[0.0; 2]; 3];
        let mut z = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let p = 0.5 * w[a][b] * w[b][c];
                    z += p;
                    marg[0][a] += p;
                    marg[1][b] += p;
                    marg[2][c] += p;
                }
            }
        }
        for k in 0..3 {
            for s in 0..2 {
                assert!((sp.posteriors[k][s] - marg[k][s] / z).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn max_sum_breaks_ties_low() {
        let lat = Lattice {
            start: vec![0.0, 0.0],
            steps: vec![dense_step(&[vec![0.0, 0.0], vec![0.0, 0.0]])],
        };
        let ms = lat.max_sum(0).unwrap();
        assert_eq!(ms.states, vec![0, 0]);
        assert_eq!(ms.ties, 2);
    }

    #[test]
    fn impossible_lattice_names_position() {
        let ninf = f64::NEG_INFINITY;
        let lat = Lattice {
            start: vec![0.0, 0.0],
            steps: vec![dense_step(&[vec![ninf, ninf], vec![ninf, ninf]])],
        };
        assert!(matches!(
            lat.sum_product(0),
            Err(Error::ZeroObservation { position: 1 })
        ));
        assert!(matches!(
            lat.max_sum(0),
            Err(Error::ZeroObservation { position: 1 })
        ));
    }
}
