//! Exact Bayes inversion of a discrete generative model into discriminative units.
//!
//! Every posterior unit is computed from the joint law of the variables it involves at its
//! position: e.g. the HMC unit at position `t` is `p_t(x) p(y|x) / Σ_x' p_t(x') p(y|x')`
//! with `p_t` the chain-propagated label marginal. Units are position-indexed up to the
//! requested horizon; longer sequences reuse the last position.

use super::{DiscriminativeUnits, GenerativeModel, GenerativeTables, Table2, Table3, Unit, UnitSet, UnitTable};
use crate::error::{Error, Result};
use crate::prob::normalize;

/// Label marginals `p(x_t)` for `t = 1..=horizon` of a first-order chain.
pub fn chain_marginals(initial: &[f64], transition: &Table2, horizon: usize) -> Table2 {
    let n = initial.len();
    let mut out = Vec::with_capacity(horizon.max(1));
    out.push(initial.to_vec());
    for _ in 1..horizon {
        let prev = out.last().expect("non-empty");
        let next: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|i| prev[i] * transition[i][j]).sum())
            .collect();
        out.push(next);
    }
    out
}

/// Label marginals `p(x_t)` for `t = 1..=horizon` of a second-order chain.
pub fn hmc2_marginals(
    initial: &[f64],
    transition: &Table2,
    transition2: &Table3,
    horizon: usize,
) -> Table2 {
    let n = initial.len();
    let mut out = vec![initial.to_vec()];
    // pair[a][b] = p(x_{t-1} = a, x_t = b)
    let mut pair: Table2 = (0..n)
        .map(|a| (0..n).map(|b| initial[a] * transition[a][b]).collect())
        .collect();
    for t in 1..horizon {
        if t > 1 {
            let mut next = vec![vec![0.0; n]; n];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        next[b][c] += pair[a][b] * transition2[a][b][c];
                    }
                }
            }
            pair = next;
        }
        out.push((0..n).map(|b| (0..n).map(|a| pair[a][b]).sum()).collect());
    }
    out
}

/// Rows of `p(output | context)` from joint weights `weight(context, output)`.
fn posterior_rows(contexts: usize, outputs: usize, weight: impl Fn(usize, usize) -> f64) -> Table2 {
    (0..contexts)
        .map(|c| {
            let w: Vec<f64> = (0..outputs).map(|o| weight(c, o)).collect();
            normalize(&w)
        })
        .collect()
}

fn check_positive(unit: &'static str, position: usize, p: &[f64]) -> Result<()> {
    match p.iter().position(|&v| v <= 0.0) {
        Some(index) => Err(Error::InversionFailure {
            unit,
            position,
            index,
        }),
        None => Ok(()),
    }
}

/// Inverts `model` into exact discriminative units with position-indexed tables for
/// sequences of up to `horizon` observations.
pub fn bayes_invert(model: &GenerativeModel, horizon: usize) -> Result<DiscriminativeUnits> {
    let violations = super::validate_generative(model);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let horizon = horizon.max(3);
    let n = model.num_labels();
    let m = model.num_symbols();
    let units = match &model.tables {
        GenerativeTables::NaiveBayes { prior, emission } => {
            check_positive("marginal", 0, prior)?;
            let rows = posterior_rows(m, n, |y, x| prior[x] * emission[x][y]);
            UnitSet::NaiveBayes {
                prior: prior.clone(),
                marginal: prior.clone(),
                posterior: Unit::Table(UnitTable::homogeneous(1, rows)),
            }
        }
        GenerativeTables::PooledMc { prior, first, next } => {
            check_positive("marginal", 0, prior)?;
            // obs[s][x][a] = p(y_{s+1} = a | x)
            let mut obs: Vec<Table2> = vec![first.clone()];
            for _ in 1..horizon - 1 {
                let prev = obs.last().expect("non-empty");
                obs.push(
                    (0..n)
                        .map(|x| {
                            (0..m)
                                .map(|b| (0..m).map(|a| prev[x][a] * next[x][a][b]).sum())
                                .collect()
                        })
                        .collect(),
                );
            }
            let single = |s: usize| posterior_rows(m, n, |a, x| prior[x] * obs[s][x][a]);
            let previous: Vec<Table2> = (0..horizon - 1).map(single).collect();
            let pair: Vec<Table2> = (0..horizon - 1)
                .map(|s| {
                    posterior_rows(m * m, n, |c, x| {
                        let (a, b) = (c / m, c % m);
                        prior[x] * obs[s][x][a] * next[x][a][b]
                    })
                })
                .collect();
            UnitSet::PooledMc {
                prior: prior.clone(),
                marginal: prior.clone(),
                first: Unit::Table(UnitTable::homogeneous(1, single(0))),
                pair: Unit::Table(UnitTable {
                    order: 2,
                    positions: pair,
                }),
                previous: Unit::Table(UnitTable {
                    order: 1,
                    positions: previous,
                }),
            }
        }
        GenerativeTables::PooledMc2 {
            prior,
            first,
            second,
            next,
        } => {
            check_positive("marginal", 0, prior)?;
            // pairs[k][x][a][b] = p(y_{k+1} = a, y_{k+2} = b | x)
            let mut pairs: Vec<Table3> = vec![(0..n)
                .map(|x| {
                    (0..m)
                        .map(|a| (0..m).map(|b| first[x][a] * second[x][a][b]).collect())
                        .collect()
                })
                .collect()];
            for _ in 1..horizon - 2 {
                let prev = pairs.last().expect("non-empty");
                let mut nxt = vec![vec![vec![0.0; m]; m]; n];
                for x in 0..n {
                    for a in 0..m {
                        for b in 0..m {
                            for c in 0..m {
                                nxt[x][b][c] += prev[x][a][b] * next[x][a][b][c];
                            }
                        }
                    }
                }
                pairs.push(nxt);
            }
            let pair_rows = |k: usize| {
                posterior_rows(m * m, n, |c, x| prior[x] * pairs[k][x][c / m][c % m])
            };
            let triple: Vec<Table2> = (0..horizon - 2)
                .map(|k| {
                    posterior_rows(m * m * m, n, |c, x| {
                        let (a, b, d) = (c / (m * m), (c / m) % m, c % m);
                        prior[x] * pairs[k][x][a][b] * next[x][a][b][d]
                    })
                })
                .collect();
            let previous_pair: Vec<Table2> = (0..horizon - 2).map(pair_rows).collect();
            let single = posterior_rows(m, n, |a, x| prior[x] * first[x][a]);
            UnitSet::PooledMc2 {
                prior: prior.clone(),
                marginal: prior.clone(),
                first: Unit::Table(UnitTable::homogeneous(1, single.clone())),
                pair: Unit::Table(UnitTable::homogeneous(2, pair_rows(0))),
                previous: Unit::Table(UnitTable::homogeneous(1, single)),
                triple: Unit::Table(UnitTable {
                    order: 3,
                    positions: triple,
                }),
                previous_pair: Unit::Table(UnitTable {
                    order: 2,
                    positions: previous_pair,
                }),
            }
        }
        GenerativeTables::Hmc {
            initial,
            transition,
            emission,
        } => {
            let marginals = chain_marginals(initial, transition, horizon);
            let posterior = emission_posteriors(&marginals, emission, m)?;
            UnitSet::Hmc {
                initial: initial.clone(),
                transition: transition.clone(),
                marginals,
                posterior,
            }
        }
        GenerativeTables::Hmc2 {
            initial,
            transition,
            transition2,
            emission,
        } => {
            let marginals = hmc2_marginals(initial, transition, transition2, horizon);
            let posterior = emission_posteriors(&marginals, emission, m)?;
            UnitSet::Hmc2 {
                initial: initial.clone(),
                transition: transition.clone(),
                transition2: transition2.clone(),
                marginals,
                posterior,
            }
        }
        GenerativeTables::HmcPlus {
            initial,
            transition,
            first_emission,
            emission,
        } => {
            let marginals = chain_marginals(initial, transition, horizon);
            check_positive("marginals", 0, &marginals[0])?;
            let pair_marginals: Vec<Table2> = (1..horizon)
                .map(|t| {
                    (0..n)
                        .map(|i| (0..n).map(|j| marginals[t - 1][i] * transition[i][j]).collect())
                        .collect()
                })
                .collect();
            for (k, pm) in pair_marginals.iter().enumerate() {
                let flat: Vec<f64> = pm.iter().flatten().copied().collect();
                check_positive("pair_marginals", k + 1, &flat)?;
            }
            let first = posterior_rows(m, n, |y, x| initial[x] * first_emission[x][y]);
            let pair: Vec<Table2> = pair_marginals
                .iter()
                .map(|pm| {
                    posterior_rows(m, n * n, |y, o| {
                        let (i, j) = (o / n, o % n);
                        pm[i][j] * emission[i][j][y]
                    })
                })
                .collect();
            UnitSet::HmcPlus {
                initial: initial.clone(),
                transition: transition.clone(),
                marginals,
                pair_marginals,
                first: Unit::Table(UnitTable::homogeneous(1, first)),
                pair: Unit::Table(UnitTable {
                    order: 1,
                    positions: pair,
                }),
            }
        }
    };
    Ok(DiscriminativeUnits {
        labels: model.labels.clone(),
        observations: Some(model.observations.clone()),
        units,
    })
}

fn emission_posteriors(marginals: &Table2, emission: &Table2, m: usize) -> Result<Unit> {
    let n = emission.len();
    let mut positions = Vec::with_capacity(marginals.len());
    for (t, p) in marginals.iter().enumerate() {
        check_positive("marginals", t, p)?;
        positions.push(posterior_rows(m, n, |y, x| p[x] * emission[x][y]));
    }
    Ok(Unit::Table(UnitTable {
        order: 1,
        positions,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::model::Validate;

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

    fn table(unit: &Unit) -> &UnitTable {
        match unit {
            Unit::Table(t) => t,
            Unit::Head(_) => panic!("expected a table unit"),
        }
    }

    #[test]
    fn nb_example_posterior() {
        let units = bayes_invert(&nb_example(), 1).unwrap();
        let UnitSet::NaiveBayes { posterior, .. } = &units.units else {
            panic!()
        };
        let rows = table(posterior).at(0);
        // 0.6·0.7 / (0.6·0.7 + 0.4·0.2)
        assert!((rows[0][0] - 0.84).abs() < 1e-12);
        assert!((rows[0][1] - 0.16).abs() < 1e-12);
        assert!((rows[1][0] - 0.36).abs() < 1e-12);
        assert!(units.validate().is_empty());
    }

    #[test]
    fn uniform_model_gives_uniform_units() {
        let n = 3;
        let m = 2;
        let model = GenerativeModel::new(
            Alphabet::numbered("s", n),
            Alphabet::numbered("o", m),
            GenerativeTables::Hmc {
                initial: vec![1.0 / 3.0; n],
                transition: vec![vec![1.0 / 3.0; n]; n],
                emission: vec![vec![0.5; m]; n],
            },
        );
        let units = bayes_invert(&model, 4).unwrap();
        let UnitSet::Hmc { posterior, .. } = &units.units else {
            panic!()
        };
        for rows in &table(posterior).positions {
            for row in rows {
                for &p in row {
                    assert!((p - 1.0 / 3.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn absorbing_chain_marginals() {
        let marg = chain_marginals(&[1.0, 0.0], &vec![vec![1.0, 0.0], vec![0.0, 1.0]], 5);
        assert_eq!(marg, vec![vec![1.0, 0.0]; 5]);
    }

    #[test]
    fn zero_marginal_fails_inversion() {
        let model = GenerativeModel::new(
            Alphabet::numbered("s", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::Hmc {
                initial: vec![1.0, 0.0],
                transition: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                emission: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            },
        );
        match bayes_invert(&model, 3) {
            Err(Error::InversionFailure { unit, index, .. }) => {
                assert_eq!(unit, "marginals");
                assert_eq!(index, 1);
            }
            other => panic!("expected an inversion failure, got {other:?}"),
        }
    }

    #[test]
    fn marginals_are_position_indexed() {
        let marg = chain_marginals(&[1.0, 0.0], &vec![vec![0.5, 0.5], vec![0.1, 0.9]], 3);
        assert_eq!(marg[1], vec![0.5, 0.5]);
        assert!((marg[2][0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn pooledmc_previous_unit_reuses_single_posterior() {
        let model = GenerativeModel::new(
            Alphabet::numbered("c", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::PooledMc {
                prior: vec![0.3, 0.7],
                first: vec![vec![0.6, 0.4], vec![0.1, 0.9]],
                next: vec![
                    vec![vec![0.8, 0.2], vec![0.3, 0.7]],
                    vec![vec![0.5, 0.5], vec![0.9, 0.1]],
                ],
            },
        );
        let units = bayes_invert(&model, 5).unwrap();
        let UnitSet::PooledMc {
            first, previous, ..
        } = &units.units
        else {
            panic!()
        };
        assert_eq!(table(first).at(0), table(previous).at(0));
        assert!(units.validate().is_empty());
    }
}
