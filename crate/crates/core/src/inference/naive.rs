//! Naive Bayes, pooled Markov chain and second-order pooled Markov chain classifiers.

use super::ratios::nb_family_terms;
use super::{DecodeResult, Source};
use crate::error::Result;
use crate::model::{joint_log_prob_unchecked, DiscriminativeUnits, GenerativeModel, ModelKind};
use crate::prob::{argmax, Categorical};
use crate::sequence::Observations;

const NB_FAMILY: [ModelKind; 3] = [ModelKind::NaiveBayes, ModelKind::PooledMc, ModelKind::PooledMc2];

/// Log score of every class.
///
/// Generative: `log p(x) + log p(y_{1:T} | x)`. Discriminative:
/// `log p(x) + Σ_t [log p(x | y_t, A_y^t) - log p(x | A_y^t)]`, which is the generative score
/// plus `log κ(y)` for exact units. Short sequences use only the factors that exist, so a
/// pooled model on `T = 1` reduces to the naive Bayes formula.
pub fn class_scores(source: Source<'_>, obs: &Observations) -> Result<Vec<f64>> {
    source.expect_kind(&NB_FAMILY)?;
    let y = source.check(obs)?;
    match source {
        Source::Generative(model) => {
            let y = y.expect("checked");
            Ok((0..model.num_labels())
                .map(|x| joint_log_prob_unchecked(&model.tables, &[x], y))
                .collect())
        }
        Source::Discriminative(units) => {
            let (prior, terms) = nb_family_terms(units, obs)?;
            Ok((0..units.num_labels())
                .map(|x| prior[x] + terms.iter().map(|r| r[x]).sum::<f64>())
                .collect())
        }
    }
}

/// `p(x | y_{1:T})` from either construction.
pub fn class_posterior(source: Source<'_>, obs: &Observations) -> Result<Categorical> {
    Ok(Categorical::from_log_weights(&class_scores(source, obs)?))
}

/// Argmax class for any naive Bayes family model; ties go to the lowest label index.
pub fn classify(source: Source<'_>, obs: &Observations) -> Result<DecodeResult> {
    let scores = class_scores(source, obs)?;
    let (best, ties) = argmax(&scores);
    Ok(DecodeResult {
        labels: vec![best],
        score: scores[best],
        ties_broken: ties,
    })
}

/// `argmax_x p(x) ∏_t p(y_t | x)`.
pub fn nb_classify_generative(model: &GenerativeModel, y: &[usize]) -> Result<DecodeResult> {
    let source = Source::Generative(model);
    source.expect_kind(&[ModelKind::NaiveBayes])?;
    classify(source, &Observations::Symbols(y.to_vec()))
}

/// `argmax_x p(x)^{1-T} ∏_t p(x | y_t)`.
pub fn nb_classify_discriminative(
    units: &DiscriminativeUnits,
    obs: &Observations,
) -> Result<DecodeResult> {
    let source = Source::Discriminative(units);
    source.expect_kind(&[ModelKind::NaiveBayes])?;
    classify(source, obs)
}

/// Pooled Markov chain classifier. Discriminative form:
/// `argmax_x p(x | y_1) ∏_{t=2}^{T} p(x | y_{t-1}, y_t) / p(x | y_{t-1})`.
pub fn pooledmc_classify(source: Source<'_>, obs: &Observations) -> Result<DecodeResult> {
    source.expect_kind(&[ModelKind::PooledMc])?;
    classify(source, obs)
}

/// Second-order pooled Markov chain classifier. Discriminative form:
/// `argmax_x p(x | y_1, y_2) ∏_{t=3}^{T} p(x | y_{t-2}, y_{t-1}, y_t) / p(x | y_{t-2}, y_{t-1})`.
pub fn pooledmc2_classify(source: Source<'_>, obs: &Observations) -> Result<DecodeResult> {
    source.expect_kind(&[ModelKind::PooledMc2])?;
    classify(source, obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::model::{bayes_invert, FeatureHead, GenerativeTables, Unit, UnitSet};

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
    fn nb_example_generative() {
        let r = nb_classify_generative(&nb_example(), &[0, 1]).unwrap();
        assert_eq!(r.labels, vec![0]);
        assert!((r.score - 0.126f64.ln()).abs() < 1e-12);
        let r = nb_classify_generative(&nb_example(), &[0]).unwrap();
        assert_eq!(r.labels, vec![0]);
    }

    #[test]
    fn nb_example_discriminative_scores() {
        let units = bayes_invert(&nb_example(), 2).unwrap();
        let scores = class_scores((&units).into(), &vec![0, 1].into()).unwrap();
        assert!((scores[0] - 0.504f64.ln()).abs() < 1e-12);
        assert!((scores[1] - 0.256f64.ln()).abs() < 1e-12);
        let r = nb_classify_discriminative(&units, &vec![0, 1].into()).unwrap();
        assert_eq!(r.labels, vec![0]);
    }

    #[test]
    fn single_observation_reduces_to_posterior_argmax() {
        let units = bayes_invert(&nb_example(), 1).unwrap();
        // p(a|v) = 0.36, p(b|v) = 0.64
        let r = nb_classify_discriminative(&units, &vec![1].into()).unwrap();
        assert_eq!(r.labels, vec![1]);
        assert!((r.score - 0.64f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_model_ties_to_first_label() {
        let model = GenerativeModel::new(
            Alphabet::numbered("c", 3),
            Alphabet::numbered("o", 2),
            GenerativeTables::NaiveBayes {
                prior: vec![1.0 / 3.0; 3],
                emission: vec![vec![0.5, 0.5]; 3],
            },
        );
        let r = nb_classify_generative(&model, &[0, 1, 1]).unwrap();
        assert_eq!(r.labels, vec![0]);
        assert_eq!(r.ties_broken, 2);
    }

    #[test]
    fn feature_head_units_classify_without_a_generative_model() {
        let head = FeatureHead {
            d: 2,
            w: vec![vec![1.0, 0.0], vec![-1.0, 0.5]],
            b: vec![0.0, 0.1],
        };
        let units = DiscriminativeUnits {
            labels: Alphabet::numbered("c", 2),
            observations: None,
            units: UnitSet::NaiveBayes {
                prior: vec![0.5, 0.5],
                marginal: vec![0.5, 0.5],
                posterior: Unit::Head(head),
            },
        };
        let obs = Observations::Features(vec![vec![2.0, 0.0], vec![1.0, 1.0]]);
        let r = nb_classify_discriminative(&units, &obs).unwrap();
        assert!(r.labels[0] < 2);
        assert_eq!(r.labels, vec![0]);
    }

    #[test]
    fn pooledmc_two_step_by_hand() {
        let model = GenerativeModel::new(
            Alphabet::numbered("c", 2),
            Alphabet::numbered("o", 2),
            GenerativeTables::PooledMc {
                prior: vec![0.5, 0.5],
                first: vec![vec![0.9, 0.1], vec![0.4, 0.6]],
                next: vec![
                    vec![vec![0.2, 0.8], vec![0.5, 0.5]],
                    vec![vec![0.9, 0.1], vec![0.5, 0.5]],
                ],
            },
        );
        // y = (0, 1): class 0 → 0.5·0.9·0.8 = 0.36, class 1 → 0.5·0.4·0.1 = 0.02
        let gen = pooledmc_classify((&model).into(), &vec![0, 1].into()).unwrap();
        assert_eq!(gen.labels, vec![0]);
        assert!((gen.score - 0.36f64.ln()).abs() < 1e-12);
        let units = bayes_invert(&model, 2).unwrap();
        let dis = pooledmc_classify((&units).into(), &vec![0, 1].into()).unwrap();
        assert_eq!(dis.labels, vec![0]);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let r = pooledmc_classify((&nb_example()).into(), &vec![0].into());
        assert!(r.is_err());
    }
}
