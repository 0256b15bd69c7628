//! Second-order chains (HMC2) over pair states and the HMC+ model, both constructions.

use super::lattice::{dense_step, Lattice, MaxSum};
use super::ratios::{emission_ratio_terms, hmcplus_terms, PairForm};
use super::{DecodeResult, PosteriorMarginals, Source};
use crate::error::Result;
use crate::model::{GenerativeModel, GenerativeTables, ModelKind, Table2, Table3, UnitSet};
use crate::prob::{ln, Categorical};
use crate::sequence::Observations;

fn pair(prev: usize, cur: usize, n: usize) -> usize {
    cur * n + prev
}

struct Hmc2Lattice {
    lattice: Lattice,
    n: usize,
    /// `true` when the sequence has a single position and states are plain labels.
    single: bool,
}

/// States are `(x_{t-1}, x_t) = (a, b)` with index `b * N + a`, starting at the second
/// position. The later label is the major index so that lowest-index tie breaking prefers
/// small late labels, as first-order Viterbi does.
fn hmc2_lattice(initial: &[f64], transition: &Table2, transition2: &Table3, terms: &[Vec<f64>]) -> Hmc2Lattice {
    let n = initial.len();
    if terms.len() == 1 {
        return Hmc2Lattice {
            lattice: Lattice {
                start: (0..n).map(|a| ln(initial[a]) + terms[0][a]).collect(),
                steps: Vec::new(),
            },
            n,
            single: true,
        };
    }
    let mut start = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            start[pair(a, b, n)] = ln(initial[a]) + terms[0][a] + ln(transition[a][b]) + terms[1][b];
        }
    }
    let log_a2: Table3 = transition2
        .iter()
        .map(|m| m.iter().map(|r| r.iter().map(|&p| ln(p)).collect()).collect())
        .collect();
    let steps = terms[2..]
        .iter()
        .map(|term| {
            let mut edges = vec![Vec::new(); n * n];
            for b in 0..n {
                for c in 0..n {
                    edges[pair(b, c, n)] = (0..n).map(|a| (pair(a, b, n), log_a2[a][b][c] + term[c])).collect();
                }
            }
            edges
        })
        .collect();
    Hmc2Lattice {
        lattice: Lattice { start, steps },
        n,
        single: false,
    }
}

fn hmc2_parts(source: Source<'_>, obs: &Observations) -> Result<Hmc2Lattice> {
    source.expect_kind(&[ModelKind::Hmc2])?;
    let y = source.check(obs)?;
    Ok(match source {
        Source::Generative(GenerativeModel {
            tables:
                GenerativeTables::Hmc2 {
                    initial,
                    transition,
                    transition2,
                    emission,
                },
            ..
        }) => {
            let terms: Vec<Vec<f64>> = y
                .expect("checked")
                .iter()
                .map(|&o| emission.iter().map(|row| ln(row[o])).collect())
                .collect();
            hmc2_lattice(initial, transition, transition2, &terms)
        }
        Source::Discriminative(units) => {
            let UnitSet::Hmc2 {
                initial,
                transition,
                transition2,
                ..
            } = &units.units
            else {
                unreachable!("kind checked")
            };
            hmc2_lattice(initial, transition, transition2, &emission_ratio_terms(units, obs)?)
        }
        Source::Generative(_) => unreachable!("kind checked"),
    })
}

/// MPM for the second-order chain: forward-backward over pair states, with `p(y_t|x_t)`
/// (generative) or `p(x_t|y_t) / p(x_t)` (discriminative) at every position.
pub fn hmc2_mpm(source: Source<'_>, obs: &Observations) -> Result<(PosteriorMarginals, DecodeResult)> {
    let lat = hmc2_parts(source, obs)?;
    let offset = usize::from(!lat.single);
    let sp = lat.lattice.sum_product(offset)?;
    let n = lat.n;
    let positions = if lat.single {
        vec![Categorical::new(sp.posteriors[0].clone())]
    } else {
        let mut out = Vec::with_capacity(sp.posteriors.len() + 1);
        let first = &sp.posteriors[0];
        out.push(Categorical::new(
            (0..n).map(|a| (0..n).map(|b| first[pair(a, b, n)]).sum()).collect(),
        ));
        for post in &sp.posteriors {
            out.push(Categorical::new(
                (0..n).map(|b| (0..n).map(|a| post[pair(a, b, n)]).sum()).collect(),
            ));
        }
        out
    };
    let marginals = PosteriorMarginals { positions };
    let decode = marginals.decode();
    Ok((marginals, decode))
}

/// MAP path of the second-order chain.
pub fn hmc2_viterbi(source: Source<'_>, obs: &Observations) -> Result<DecodeResult> {
    let lat = hmc2_parts(source, obs)?;
    let MaxSum {
        states,
        score,
        ties,
    } = lat.lattice.max_sum(usize::from(!lat.single))?;
    let labels = if lat.single {
        states
    } else {
        let n = lat.n;
        std::iter::once(states[0] % n)
            .chain(states.iter().map(|s| s / n))
            .collect()
    };
    Ok(DecodeResult {
        labels,
        score,
        ties_broken: ties,
    })
}

fn hmcplus_lattice(source: Source<'_>, obs: &Observations, form: PairForm) -> Result<Lattice> {
    source.expect_kind(&[ModelKind::HmcPlus])?;
    let y = source.check(obs)?;
    match source {
        Source::Generative(GenerativeModel {
            tables:
                GenerativeTables::HmcPlus {
                    initial,
                    transition,
                    first_emission,
                    emission,
                },
            ..
        }) => {
            let y = y.expect("checked");
            let n = initial.len();
            let start = (0..n).map(|x| ln(initial[x]) + ln(first_emission[x][y[0]])).collect();
            let steps = y[1..]
                .iter()
                .map(|&o| {
                    let w: Table2 = (0..n)
                        .map(|i| (0..n).map(|j| ln(transition[i][j]) + ln(emission[i][j][o])).collect())
                        .collect();
                    dense_step(&w)
                })
                .collect();
            Ok(Lattice { start, steps })
        }
        Source::Discriminative(units) => {
            let UnitSet::HmcPlus { initial, .. } = &units.units else {
                unreachable!("kind checked")
            };
            let (head, steps) = hmcplus_terms(units, obs, form)?;
            Ok(Lattice {
                start: initial.iter().zip(&head).map(|(&p, r)| ln(p) + r).collect(),
                steps: steps.iter().map(|w| dense_step(w)).collect(),
            })
        }
        Source::Generative(_) => unreachable!("kind checked"),
    }
}

/// MPM for HMC+ with the default step form [`PairForm::PairMarginal`].
pub fn hmcplus_mpm(source: Source<'_>, obs: &Observations) -> Result<(PosteriorMarginals, DecodeResult)> {
    hmcplus_mpm_with(source, obs, PairForm::PairMarginal)
}

/// MPM for HMC+. Generative steps weigh `p(x_{t+1}|x_t) p(y_{t+1}|x_t, x_{t+1})`; the
/// discriminative step is `p(x_t, x_{t+1}|y_{t+1}) / p(x_t)` in either algebraic `form`,
/// after a first factor `p(x_1|y_1)`.
pub fn hmcplus_mpm_with(
    source: Source<'_>,
    obs: &Observations,
    form: PairForm,
) -> Result<(PosteriorMarginals, DecodeResult)> {
    let sp = hmcplus_lattice(source, obs, form)?.sum_product(0)?;
    let marginals = PosteriorMarginals {
        positions: sp.posteriors.into_iter().map(Categorical::new).collect(),
    };
    let decode = marginals.decode();
    Ok((marginals, decode))
}

/// MAP path of HMC+.
pub fn hmcplus_viterbi(source: Source<'_>, obs: &Observations) -> Result<DecodeResult> {
    let best = hmcplus_lattice(source, obs, PairForm::PairMarginal)?.max_sum(0)?;
    Ok(DecodeResult {
        labels: best.states,
        score: best.score,
        ties_broken: best.ties,
    })
}
