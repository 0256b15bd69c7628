//! Per-position log ratios `log p(A_x^t | y_t, A_y^t) - log p(A_x^t | A_y^t)`.

use crate::error::{Error, Result};
use crate::model::{DiscriminativeUnits, Table2, Unit, UnitSet};
use crate::prob::ln;
use crate::sequence::Observations;

/// `num - den` in log space. A zero numerator makes the term impossible whatever the
/// denominator; a zero denominator under a positive numerator is undefined.
#[inline]
fn log_ratio(num: f64, den: f64, unit: &'static str, position: usize) -> Result<f64> {
    if num == f64::NEG_INFINITY {
        Ok(f64::NEG_INFINITY)
    } else if den == f64::NEG_INFINITY {
        Err(Error::ZeroDenominator { unit, position })
    } else {
        Ok(num - den)
    }
}

fn unit_ratio(
    units: &DiscriminativeUnits,
    obs: &Observations,
    (num, num_k, num_ctx): (&Unit, usize, std::ops::Range<usize>),
    den: Denominator<'_>,
    t: usize,
) -> Result<Vec<f64>> {
    let m = units.num_symbols();
    let top = num.log_probs(num_k, obs, num_ctx, m)?;
    let (bottom, den_name): (Vec<f64>, &'static str) = match den {
        Denominator::Marginal(p) => (p.iter().map(|&v| ln(v)).collect(), "marginal"),
        Denominator::Unit(name, unit, k, ctx) => (unit.log_probs(k, obs, ctx, m)?, name),
    };
    top.iter()
        .zip(&bottom)
        .map(|(&a, &b)| log_ratio(a, b, den_name, t))
        .collect()
}

enum Denominator<'a> {
    Marginal(&'a [f64]),
    Unit(&'static str, &'a Unit, usize, std::ops::Range<usize>),
}

/// Naive Bayes family: the structural `log p(x)` and one ratio vector over `x` per
/// position.
pub(crate) fn nb_family_terms(
    units: &DiscriminativeUnits,
    obs: &Observations,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let t_len = obs.len();
    let mut terms = Vec::with_capacity(t_len);
    let prior = match &units.units {
        UnitSet::NaiveBayes {
            prior,
            marginal,
            posterior,
        } => {
            for t in 0..t_len {
                terms.push(unit_ratio(
                    units,
                    obs,
                    (posterior, t, t..t + 1),
                    Denominator::Marginal(marginal),
                    t,
                )?);
            }
            prior
        }
        UnitSet::PooledMc {
            prior,
            marginal,
            first,
            pair,
            previous,
        } => {
            terms.push(unit_ratio(
                units,
                obs,
                (first, 0, 0..1),
                Denominator::Marginal(marginal),
                0,
            )?);
            for t in 1..t_len {
                terms.push(unit_ratio(
                    units,
                    obs,
                    (pair, t - 1, t - 1..t + 1),
                    Denominator::Unit("previous", previous, t - 1, t - 1..t),
                    t,
                )?);
            }
            prior
        }
        UnitSet::PooledMc2 {
            prior,
            marginal,
            first,
            pair,
            previous,
            triple,
            previous_pair,
        } => {
            terms.push(unit_ratio(
                units,
                obs,
                (first, 0, 0..1),
                Denominator::Marginal(marginal),
                0,
            )?);
            if t_len > 1 {
                terms.push(unit_ratio(
                    units,
                    obs,
                    (pair, 0, 0..2),
                    Denominator::Unit("previous", previous, 0, 0..1),
                    1,
                )?);
            }
            for t in 2..t_len {
                terms.push(unit_ratio(
                    units,
                    obs,
                    (triple, t - 2, t - 2..t + 1),
                    Denominator::Unit("previous_pair", previous_pair, t - 2, t - 2..t),
                    t,
                )?);
            }
            prior
        }
        _ => unreachable!("caller checks the kind"),
    };
    Ok((prior.iter().map(|&p| ln(p)).collect(), terms))
}

/// HMC and HMC2: `log p_t(x_t | y_t) - log p(x_t)` for every position.
pub(crate) fn emission_ratio_terms(
    units: &DiscriminativeUnits,
    obs: &Observations,
) -> Result<Vec<Vec<f64>>> {
    let (posterior, marginals) = match &units.units {
        UnitSet::Hmc {
            posterior,
            marginals,
            ..
        }
        | UnitSet::Hmc2 {
            posterior,
            marginals,
            ..
        } => (posterior, marginals),
        _ => unreachable!("caller checks the kind"),
    };
    (0..obs.len())
        .map(|t| {
            let marg = &marginals[t.min(marginals.len() - 1)];
            unit_ratio(
                units,
                obs,
                (posterior, t, t..t + 1),
                Denominator::Marginal(marg),
                t,
            )
        })
        .collect()
}

/// How the HMC+ step weight from `x_{t-1}` to `x_t` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairForm {
    /// `p(x_t | x_{t-1}) · p(x_{t-1}, x_t | y_t) / p(x_{t-1}, x_t)`
    PairMarginal,
    /// `p(x_{t-1}, x_t | y_t) / p(x_{t-1})`
    SingleMarginal,
}

/// HMC+: the first-position ratio over `x_1` and, for each later position, the full log
/// step weight `[i][j]` from `x_{t-1} = i` to `x_t = j` (transition included).
pub(crate) fn hmcplus_terms(
    units: &DiscriminativeUnits,
    obs: &Observations,
    form: PairForm,
) -> Result<(Vec<f64>, Vec<Table2>)> {
    let UnitSet::HmcPlus {
        transition,
        marginals,
        pair_marginals,
        first,
        pair,
        ..
    } = &units.units
    else {
        unreachable!("caller checks the kind")
    };
    let n = units.num_labels();
    let m = units.num_symbols();
    let head = unit_ratio(
        units,
        obs,
        (first, 0, 0..1),
        Denominator::Marginal(&marginals[0]),
        0,
    )?;
    let mut steps = Vec::with_capacity(obs.len().saturating_sub(1));
    for t in 1..obs.len() {
        let lp = pair.log_probs(t - 1, obs, t..t + 1, m)?;
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let num = lp[i * n + j];
                w[i][j] = match form {
                    PairForm::PairMarginal => {
                        let pm = &pair_marginals[(t - 1).min(pair_marginals.len() - 1)];
                        let r = log_ratio(num, ln(pm[i][j]), "pair_marginals", t)?;
                        ln(transition[i][j]) + r
                    }
                    PairForm::SingleMarginal => {
                        let marg = &marginals[(t - 1).min(marginals.len() - 1)];
                        log_ratio(num, ln(marg[i]), "marginals", t)?
                    }
                };
            }
        }
        steps.push(w);
    }
    Ok((head, steps))
}

/// The bracket of the discriminative construction for a full hidden configuration:
/// `log p(x) + Σ_t log [p(A_x^t | y_t, A_y^t) / p(A_x^t | A_y^t)]`. For exact units this
/// equals `log κ(y) + log p(x, y)`.
pub fn discriminative_log_weight(
    units: &DiscriminativeUnits,
    x: &[usize],
    obs: &Observations,
) -> Result<f64> {
    units.check_observations(obs)?;
    crate::model::check_label_layout(x, units.kind(), obs.len(), units.num_labels())?;
    match &units.units {
        UnitSet::NaiveBayes { .. } | UnitSet::PooledMc { .. } | UnitSet::PooledMc2 { .. } => {
            let (prior, terms) = nb_family_terms(units, obs)?;
            Ok(prior[x[0]] + terms.iter().map(|r| r[x[0]]).sum::<f64>())
        }
        UnitSet::Hmc {
            initial,
            transition,
            ..
        } => {
            let terms = emission_ratio_terms(units, obs)?;
            Ok(crate::model::chain_log_prob(initial, transition, x)
                + x.iter().enumerate().map(|(t, &l)| terms[t][l]).sum::<f64>())
        }
        UnitSet::Hmc2 {
            initial,
            transition,
            transition2,
            ..
        } => {
            let terms = emission_ratio_terms(units, obs)?;
            Ok(crate::model::chain2_log_prob(initial, transition, transition2, x)
                + x.iter().enumerate().map(|(t, &l)| terms[t][l]).sum::<f64>())
        }
        UnitSet::HmcPlus { initial, .. } => {
            let (head, steps) = hmcplus_terms(units, obs, PairForm::PairMarginal)?;
            let mut w = ln(initial[x[0]]) + head[x[0]];
            for t in 1..x.len() {
                w += steps[t - 1][x[t - 1]][x[t]];
            }
            Ok(w)
        }
    }
}
