//! First-order hidden Markov chain: Viterbi in both constructions, classic forward-backward
//! and the entropic forward-backward.

use super::lattice::{dense_step, Lattice};
use super::ratios::emission_ratio_terms;
use super::{DecodeResult, PosteriorMarginals, Source};
use crate::error::{Error, Result};
use crate::model::{DiscriminativeUnits, GenerativeModel, GenerativeTables, ModelKind, Table2, UnitSet};
use crate::prob::{ln, normalize, Categorical};
use crate::sequence::Observations;

/// How the forward and backward quantities are kept in range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// Divide `α_t` and `β_t` by their sums at every step.
    #[default]
    Rescale,
    /// Raw recursions. Fine for short sequences; underflows on long ones.
    None,
    /// Log-domain recursions with log-sum-exp.
    LogSpace,
}

/// Full output of the entropic forward-backward.
#[derive(Debug, Clone)]
pub struct EfbOutput {
    pub marginals: PosteriorMarginals,
    pub decode: DecodeResult,
    /// `α_t(x_t)` as computed under `scaling`; natural logs for [`Scaling::LogSpace`].
    pub alpha: Table2,
    /// `β_t(x_t)`, same conventions as `alpha`.
    pub beta: Table2,
    pub scaling: Scaling,
}

/// Log-space lattice of a first-order chain whose position `t` carries the extra log factor
/// `terms[t][x_t]`.
pub(crate) fn chain_lattice(initial: &[f64], transition: &Table2, terms: &[Vec<f64>]) -> Lattice {
    let n = initial.len();
    let start = (0..n).map(|j| ln(initial[j]) + terms[0][j]).collect();
    let log_a: Table2 = transition
        .iter()
        .map(|row| row.iter().map(|&p| ln(p)).collect())
        .collect();
    let steps = terms[1..]
        .iter()
        .map(|term| {
            let w: Table2 = (0..n)
                .map(|i| (0..n).map(|j| log_a[i][j] + term[j]).collect())
                .collect();
            dense_step(&w)
        })
        .collect();
    Lattice { start, steps }
}

fn emission_terms(emission: &Table2, y: &[usize]) -> Vec<Vec<f64>> {
    y.iter()
        .map(|&o| emission.iter().map(|row| ln(row[o])).collect())
        .collect()
}

/// Structural tables and per-position log factors of either construction.
fn hmc_parts<'a>(source: Source<'a>, obs: &Observations) -> Result<(&'a [f64], &'a Table2, Vec<Vec<f64>>)> {
    source.expect_kind(&[ModelKind::Hmc])?;
    let y = source.check(obs)?;
    match source {
        Source::Generative(GenerativeModel {
            tables:
                GenerativeTables::Hmc {
                    initial,
                    transition,
                    emission,
                },
            ..
        }) => Ok((initial, transition, emission_terms(emission, y.expect("checked")))),
        Source::Discriminative(units) => {
            let UnitSet::Hmc {
                initial,
                transition,
                ..
            } = &units.units
            else {
                unreachable!("kind checked")
            };
            Ok((initial, transition, emission_ratio_terms(units, obs)?))
        }
        Source::Generative(_) => unreachable!("kind checked"),
    }
}

/// MAP path. Generative: max-sum of `log p(x_1) + log p(y_1|x_1) + Σ [log p(x_{t+1}|x_t) +
/// log p(y_{t+1}|x_{t+1})]`. Discriminative: the same recursion with `log p(x_t|y_t) -
/// log p(x_t)` in place of the emission.
pub fn hmc_viterbi(source: Source<'_>, obs: &Observations) -> Result<DecodeResult> {
    let (initial, transition, terms) = hmc_parts(source, obs)?;
    let best = chain_lattice(initial, transition, &terms).max_sum(0)?;
    Ok(DecodeResult {
        labels: best.states,
        score: best.score,
        ties_broken: best.ties,
    })
}

/// Scaled forward-backward in the probability domain. `start[x]` is the weight of `x_1` and
/// `factors[t-1][x]` multiplies position `t`'s transition into `x`.
fn forward_backward(
    start: Vec<f64>,
    transition: &Table2,
    factors: &[Vec<f64>],
    rescale: bool,
) -> Result<(Table2, Table2)> {
    let n = start.len();
    let len = factors.len() + 1;
    let mut alpha = Vec::with_capacity(len);
    let push = |alpha: &mut Table2, mut a: Vec<f64>, t: usize| -> Result<()> {
        let s: f64 = a.iter().sum();
        if !(s > 0.0) {
            return Err(Error::ZeroObservation { position: t });
        }
        let c = if rescale { s } else { 1.0 };
        a.iter_mut().for_each(|v| *v /= c);
        alpha.push(a);
        Ok(())
    };
    push(&mut alpha, start, 0)?;
    for (k, f) in factors.iter().enumerate() {
        let prev: &Vec<f64> = &alpha[k];
        let a: Vec<f64> = (0..n)
            .map(|j| f[j] * (0..n).map(|i| prev[i] * transition[i][j]).sum::<f64>())
            .collect();
        push(&mut alpha, a, k + 1)?;
    }
    let mut beta = vec![vec![1.0; n]; len];
    for k in (0..len - 1).rev() {
        let f = &factors[k];
        let next = &beta[k + 1];
        let mut b: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| transition[i][j] * f[j] * next[j]).sum())
            .collect();
        if rescale {
            let s: f64 = b.iter().sum();
            if s > 0.0 {
                b.iter_mut().for_each(|v| *v /= s);
            }
        }
        beta[k] = b;
    }
    Ok((alpha, beta))
}

fn marginals_from(alpha: &Table2, beta: &Table2) -> Result<PosteriorMarginals> {
    let mut positions = Vec::with_capacity(alpha.len());
    for (t, (a, b)) in alpha.iter().zip(beta).enumerate() {
        let w: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        if !(w.iter().sum::<f64>() > 0.0) {
            return Err(Error::ZeroObservation { position: t });
        }
        positions.push(Categorical::new(normalize(&w)));
    }
    Ok(PosteriorMarginals { positions })
}

/// Classic scaled forward-backward on a generative HMC.
pub fn hmc_fb_mpm(model: &GenerativeModel, obs: &Observations) -> Result<(PosteriorMarginals, DecodeResult)> {
    let source = Source::Generative(model);
    let (initial, transition, terms) = hmc_parts(source, obs)?;
    let probs: Table2 = terms.iter().map(|r| r.iter().map(|v| v.exp()).collect()).collect();
    let start = initial.iter().zip(&probs[0]).map(|(p, e)| p * e).collect();
    let (alpha, beta) = forward_backward(start, transition, &probs[1..], true)?;
    let marginals = marginals_from(&alpha, &beta)?;
    let decode = marginals.decode();
    Ok((marginals, decode))
}

/// Entropic forward-backward with per-step rescaling:
/// `α_1(x_1) = p(x_1|y_1)`,
/// `α_{t+1}(x_{t+1}) = [p(x_{t+1}|y_{t+1}) / p(x_{t+1})] Σ_{x_t} p(x_{t+1}|x_t) α_t(x_t)`,
/// `β_T = 1`, `β_t(x_t) = Σ_{x_{t+1}} [p(x_{t+1}|y_{t+1}) / p(x_{t+1})] p(x_{t+1}|x_t) β_{t+1}(x_{t+1})`.
pub fn hmc_efb_mpm(
    units: &DiscriminativeUnits,
    obs: &Observations,
) -> Result<(PosteriorMarginals, DecodeResult)> {
    let out = hmc_efb_mpm_with(units, obs, Scaling::Rescale)?;
    Ok((out.marginals, out.decode))
}

/// [`hmc_efb_mpm`] with a choice of scaling, exposing `α` and `β`.
pub fn hmc_efb_mpm_with(
    units: &DiscriminativeUnits,
    obs: &Observations,
    scaling: Scaling,
) -> Result<EfbOutput> {
    let source = Source::Discriminative(units);
    let (initial, transition, terms) = hmc_parts(source, obs)?;
    let (alpha, beta, marginals) = match scaling {
        Scaling::LogSpace => {
            let sp = chain_lattice(initial, transition, &terms).sum_product(0)?;
            let marginals = PosteriorMarginals {
                positions: sp.posteriors.into_iter().map(Categorical::new).collect(),
            };
            (sp.log_alpha, sp.log_beta, marginals)
        }
        Scaling::Rescale | Scaling::None => {
            let ratios: Table2 = terms.iter().map(|r| r.iter().map(|v| v.exp()).collect()).collect();
            let start = initial.iter().zip(&ratios[0]).map(|(p, r)| p * r).collect();
            let (alpha, beta) =
                forward_backward(start, transition, &ratios[1..], scaling == Scaling::Rescale)?;
            let marginals = marginals_from(&alpha, &beta)?;
            (alpha, beta, marginals)
        }
    };
    let decode = marginals.decode();
    Ok(EfbOutput {
        marginals,
        decode,
        alpha,
        beta,
        scaling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::inference::brute_force_marginals;
    use crate::model::bayes_invert;

    fn hmc(transition: Table2, emission: Table2) -> GenerativeModel {
        let n = transition.len();
        let m = emission[0].len();
        GenerativeModel::new(
            Alphabet::numbered("s", n),
            Alphabet::numbered("o", m),
            GenerativeTables::Hmc {
                initial: vec![1.0 / n as f64; n],
                transition,
                emission,
            },
        )
    }

    fn example() -> GenerativeModel {
        GenerativeModel::new(
            Alphabet::new(["N", "V"]).unwrap(),
            Alphabet::new(["dog", "runs", "the"]).unwrap(),
            GenerativeTables::Hmc {
                initial: vec![0.6, 0.4],
                transition: vec![vec![0.3, 0.7], vec![0.6, 0.4]],
                emission: vec![vec![0.5, 0.1, 0.4], vec![0.2, 0.7, 0.1]],
            },
        )
    }

    #[test]
    fn single_step_viterbi_agrees() {
        let model = example();
        let units = bayes_invert(&model, 1).unwrap();
        for y in 0..3 {
            let obs: Observations = vec![y].into();
            let g = hmc_viterbi((&model).into(), &obs).unwrap();
            let d = hmc_viterbi((&units).into(), &obs).unwrap();
            assert_eq!(g.labels, d.labels);
        }
    }

    #[test]
    fn sticky_chain_with_label_one_evidence() {
        let model = hmc(
            vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            vec![vec![0.7, 0.3], vec![0.2, 0.8]],
        );
        let obs: Observations = vec![1, 1, 1, 1].into();
        assert_eq!(hmc_viterbi((&model).into(), &obs).unwrap().labels, vec![1; 4]);
        let units = bayes_invert(&model, 4).unwrap();
        assert_eq!(hmc_viterbi((&units).into(), &obs).unwrap().labels, vec![1; 4]);
    }

    #[test]
    fn fb_single_step_is_normalized_joint() {
        let (marg, _) = hmc_fb_mpm(&example(), &vec![0].into()).unwrap();
        let w = [0.6 * 0.5, 0.4 * 0.2];
        let z = w[0] + w[1];
        assert!((marg.positions[0].probs()[0] - w[0] / z).abs() < 1e-15);
    }

    #[test]
    fn uniform_transitions_factorize() {
        let emission = vec![vec![0.5, 0.1, 0.4], vec![0.2, 0.7, 0.1]];
        let model = hmc(vec![vec![0.5, 0.5], vec![0.5, 0.5]], emission.clone());
        let y = vec![2, 0, 1];
        let (marg, _) = hmc_fb_mpm(&model, &y.clone().into()).unwrap();
        for (t, &o) in y.iter().enumerate() {
            let p = normalize(&[emission[0][o], emission[1][o]]);
            assert!((marg.positions[t].probs()[0] - p[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn efb_matches_fb_and_oracle() {
        let model = example();
        let y = vec![2, 0, 1, 1, 0, 2];
        let obs: Observations = y.clone().into();
        let (fb, _) = hmc_fb_mpm(&model, &obs).unwrap();
        let units = bayes_invert(&model, y.len()).unwrap();
        let oracle = brute_force_marginals(&model, &y).unwrap();
        for scaling in [Scaling::Rescale, Scaling::None, Scaling::LogSpace] {
            let efb = hmc_efb_mpm_with(&units, &obs, scaling).unwrap();
            assert!(efb.marginals.max_abs_diff(&fb) < 1e-12);
            assert!(efb.marginals.max_abs_diff(&oracle) < 1e-12);
        }
        assert!(fb.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn efb_boundary_quantities() {
        let model = example();
        let units = bayes_invert(&model, 4).unwrap();
        let obs: Observations = vec![1, 0, 2, 2].into();
        let out = hmc_efb_mpm_with(&units, &obs, Scaling::None).unwrap();
        assert_eq!(out.beta[3], vec![1.0, 1.0]);
        let p1 = normalize(&[0.6 * 0.1, 0.4 * 0.7]);
        assert!((out.alpha[0][0] - p1[0]).abs() < 1e-15);
        assert!((out.alpha[0][1] - p1[1]).abs() < 1e-15);
    }

    #[test]
    fn impossible_observation_is_reported() {
        let model = hmc(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        );
        match hmc_fb_mpm(&model, &vec![0, 1].into()) {
            Err(Error::ZeroObservation { position }) => assert_eq!(position, 1),
            other => panic!("expected a zero-observation error, got {other:?}"),
        }
    }
}
