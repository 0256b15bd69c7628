use super::*;
use crate::alphabet::Alphabet;
use crate::error::Error;
use crate::inference::{class_posterior, hmc_efb_mpm, hmc_fb_mpm, hmc2_mpm, hmcplus_mpm, Source};
use crate::model::{bayes_invert, GenerativeTables, ModelKind, Unit, UnitSet, Validate};
use crate::prob::total_variation;
use crate::sequence::LabeledSequence;
use crate::synth::{sample_corpus, Rng};

fn exact() -> TrainConfig {
    TrainConfig {
        smoothing_alpha: 0.0,
        ..Default::default()
    }
}

fn ab() -> (Alphabet, Alphabet) {
    (Alphabet::new(["a", "b"]).unwrap(), Alphabet::new(["u", "v"]).unwrap())
}

fn posterior_rows(unit: &Unit) -> &Vec<Vec<f64>> {
    match unit {
        Unit::Table(t) => t.at(0),
        Unit::Head(_) => panic!("expected a table"),
    }
}

#[test]
fn nb_counts_without_smoothing() {
    let (l, o) = ab();
    let data = [LabeledSequence::new(vec![0], vec![0, 0])];
    let m = fit_generative(ModelKind::NaiveBayes, &l, &o, &data, &exact()).unwrap();
    let GenerativeTables::NaiveBayes { emission, .. } = &m.tables else {
        panic!()
    };
    assert_eq!(emission[0], vec![1.0, 0.0]);
    // the unseen class row is uniform
    assert_eq!(emission[1], vec![0.5, 0.5]);
}

#[test]
fn nb_add_one_smoothing() {
    let (l, o) = ab();
    let data = [LabeledSequence::new(vec![0], vec![0, 0])];
    let m = fit_generative(ModelKind::NaiveBayes, &l, &o, &data, &TrainConfig::default()).unwrap();
    let GenerativeTables::NaiveBayes { emission, prior } = &m.tables else {
        panic!()
    };
    assert!((emission[0][0] - 0.75).abs() < 1e-15);
    assert!((prior[0] - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn discriminative_counts() {
    let (l, o) = ab();
    let data = [LabeledSequence::new(vec![0], vec![0])];
    let u = fit_discriminative_tables(ModelKind::NaiveBayes, &l, &o, &data, &exact()).unwrap();
    let UnitSet::NaiveBayes { posterior, .. } = &u.units else {
        panic!()
    };
    assert_eq!(posterior_rows(posterior)[0], vec![1.0, 0.0]);
    let u = fit_discriminative_tables(ModelKind::NaiveBayes, &l, &o, &data, &TrainConfig::default()).unwrap();
    let UnitSet::NaiveBayes { posterior, .. } = &u.units else {
        panic!()
    };
    assert_eq!(posterior_rows(posterior)[1], vec![0.5, 0.5]);
}

#[test]
fn empty_data_is_an_error() {
    let (l, o) = ab();
    assert!(matches!(
        fit_generative(ModelKind::Hmc, &l, &o, &[], &exact()),
        Err(Error::EmptyData)
    ));
    assert!(matches!(
        fit_discriminative_tables(ModelKind::Hmc, &l, &o, &[], &exact()),
        Err(Error::EmptyData)
    ));
}

#[test]
fn smoothed_tables_are_valid_for_every_kind() {
    let (l, o) = ab();
    for kind in ModelKind::ALL {
        let data = if kind.is_sequential() {
            vec![LabeledSequence::new(vec![0, 1, 1], vec![0, 1, 1])]
        } else {
            vec![LabeledSequence::new(vec![1], vec![0, 1, 1])]
        };
        let m = fit_generative(kind, &l, &o, &data, &TrainConfig::default()).unwrap();
        assert!(m.validate().is_empty(), "{kind}");
        let u = fit_discriminative_tables(kind, &l, &o, &data, &TrainConfig::default()).unwrap();
        assert!(u.validate().is_empty(), "{kind}: {:?}", u.validate());
    }
}

#[test]
fn merge_matches_single_pass() {
    let (l, o) = ab();
    let data = [
        LabeledSequence::new(vec![0, 1, 1], vec![0, 1, 1]),
        LabeledSequence::new(vec![1, 0], vec![1, 0]),
        LabeledSequence::new(vec![0, 0, 0, 1], vec![0, 0, 1, 1]),
    ];
    for kind in [ModelKind::Hmc, ModelKind::Hmc2, ModelKind::HmcPlus] {
        let mut whole = CountAccumulator::new(kind, l.len(), o.len());
        data.iter().for_each(|s| whole.add(s).unwrap());
        let mut a = CountAccumulator::new(kind, l.len(), o.len());
        let mut b = CountAccumulator::new(kind, l.len(), o.len());
        a.add(&data[2]).unwrap();
        b.add(&data[0]).unwrap();
        b.add(&data[1]).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a, whole);
    }
}

fn truth_hmc() -> crate::model::GenerativeModel {
    crate::model::GenerativeModel::new(
        Alphabet::numbered("s", 2),
        Alphabet::numbered("o", 3),
        GenerativeTables::Hmc {
            initial: vec![0.4, 0.6],
            transition: vec![vec![0.7, 0.3], vec![0.25, 0.75]],
            emission: vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.2, 0.7]],
        },
    )
}

#[test]
fn recovers_a_known_hmc() {
    let truth = truth_hmc();
    let data = sample_corpus(&truth, 2000, 50, 17).unwrap();
    let fit = fit_generative(ModelKind::Hmc, &truth.labels, &truth.observations, &data, &TrainConfig::default()).unwrap();
    let (GenerativeTables::Hmc {
        transition: a,
        emission: e,
        ..
    }, GenerativeTables::Hmc {
        transition: ta,
        emission: te,
        ..
    }) = (&fit.tables, &truth.tables)
    else {
        panic!()
    };
    for (r, t) in a.iter().zip(ta).chain(e.iter().zip(te)) {
        assert!(total_variation(r, t) <= 0.02);
    }
}

/// With α = 0 the fitted units and the inverted fitted model give the same posteriors, and
/// the per-configuration weights differ by an x-independent constant.
#[test]
fn exact_fit_identity_on_posteriors() {
    let (l, o) = ab();
    let hmc_data = vec![
        LabeledSequence::new(vec![0, 1, 1, 0], vec![0, 1, 1, 0]),
        LabeledSequence::new(vec![1, 0, 0, 1], vec![1, 0, 1, 1]),
        LabeledSequence::new(vec![0, 0, 1, 1], vec![0, 0, 1, 1]),
        LabeledSequence::new(vec![1, 1, 0, 0], vec![0, 1, 0, 1]),
    ];
    let y: crate::sequence::Observations = vec![0, 1, 1, 0].into();
    for kind in [ModelKind::Hmc, ModelKind::Hmc2, ModelKind::HmcPlus] {
        let gen = fit_generative(kind, &l, &o, &hmc_data, &exact()).unwrap();
        let units = fit_discriminative_tables(kind, &l, &o, &hmc_data, &exact()).unwrap();
        let (a, b) = match kind {
            ModelKind::Hmc => (hmc_fb_mpm(&gen, &y).unwrap().0, hmc_efb_mpm(&units, &y).unwrap().0),
            ModelKind::Hmc2 => (
                hmc2_mpm(Source::Generative(&gen), &y).unwrap().0,
                hmc2_mpm(Source::Discriminative(&units), &y).unwrap().0,
            ),
            _ => (
                hmcplus_mpm(Source::Generative(&gen), &y).unwrap().0,
                hmcplus_mpm(Source::Discriminative(&units), &y).unwrap().0,
            ),
        };
        assert!(a.max_abs_diff(&b) < 1e-12, "{kind}");
    }
    let nb_data = vec![
        LabeledSequence::new(vec![0], vec![0, 1, 0]),
        LabeledSequence::new(vec![1], vec![1, 1, 0]),
        LabeledSequence::new(vec![0], vec![1, 0, 0]),
        LabeledSequence::new(vec![1], vec![0, 1, 1]),
    ];
    for kind in [ModelKind::NaiveBayes, ModelKind::PooledMc, ModelKind::PooledMc2] {
        let gen = fit_generative(kind, &l, &o, &nb_data, &exact()).unwrap();
        let units = fit_discriminative_tables(kind, &l, &o, &nb_data, &exact()).unwrap();
        let y: crate::sequence::Observations = vec![0, 1, 0].into();
        let a = class_posterior(Source::Generative(&gen), &y).unwrap();
        let b = class_posterior(Source::Discriminative(&units), &y).unwrap();
        assert!(total_variation(a.probs(), b.probs()) < 1e-12, "{kind}");
    }
}

#[test]
fn exact_nb_fit_matches_inversion_table_for_equal_lengths() {
    let (l, o) = ab();
    let data = vec![
        LabeledSequence::new(vec![0], vec![0, 1]),
        LabeledSequence::new(vec![1], vec![1, 1]),
        LabeledSequence::new(vec![0], vec![0, 0]),
    ];
    let gen = fit_generative(ModelKind::NaiveBayes, &l, &o, &data, &exact()).unwrap();
    let inv = bayes_invert(&gen, 1).unwrap();
    let fit = fit_discriminative_tables(ModelKind::NaiveBayes, &l, &o, &data, &exact()).unwrap();
    let (UnitSet::NaiveBayes { posterior: a, .. }, UnitSet::NaiveBayes { posterior: b, .. }) = (&inv.units, &fit.units) else {
        panic!()
    };
    for (ra, rb) in posterior_rows(a).iter().zip(posterior_rows(b)) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}

#[test]
fn chain_marginals_flag() {
    let truth = truth_hmc();
    let data = sample_corpus(&truth, 50, 6, 3).unwrap();
    let cfg = TrainConfig {
        marginals: MarginalEstimate::Chain,
        ..Default::default()
    };
    let u = fit_discriminative_tables(ModelKind::Hmc, &truth.labels, &truth.observations, &data, &cfg).unwrap();
    let UnitSet::Hmc { marginals, .. } = &u.units else {
        panic!()
    };
    assert_eq!(marginals.len(), 6);
    let u = fit_discriminative_tables(ModelKind::Hmc, &truth.labels, &truth.observations, &data, &TrainConfig::default()).unwrap();
    let UnitSet::Hmc { marginals, .. } = &u.units else {
        panic!()
    };
    assert_eq!(marginals.len(), 1);
}

fn separable(n: usize, rng: &mut Rng) -> Vec<LabeledSequence> {
    (0..n)
        .map(|i| {
            let c = i % 2;
            let s = if c == 1 { 1.0 } else { -1.0 };
            let v = vec![s * (1.0 + rng.uniform()), rng.uniform() * 2.0 - 1.0];
            LabeledSequence::new(vec![c], vec![v])
        })
        .collect()
}

#[test]
fn separable_training_accuracy() {
    let data = separable(200, &mut Rng::new(5));
    let labels = Alphabet::numbered("c", 2);
    let cfg = TrainConfig {
        epochs: 200,
        ..Default::default()
    };
    let trained = train_feature_head(ModelKind::NaiveBayes, &labels, &data, &cfg).unwrap();
    let correct = data
        .iter()
        .filter(|s| {
            crate::inference::classify(Source::Discriminative(&trained.units), &s.observations)
                .unwrap()
                .labels[0]
                == s.labels[0]
        })
        .count();
    assert!(correct as f64 / 200.0 >= 0.99);
    assert_eq!(trained.trace.len(), 201);
}

#[test]
fn zero_epochs_keep_initialization() {
    let data = separable(10, &mut Rng::new(6));
    let cfg = TrainConfig {
        epochs: 0,
        ..Default::default()
    };
    let trained = train_feature_head(ModelKind::NaiveBayes, &Alphabet::numbered("c", 2), &data, &cfg).unwrap();
    let UnitSet::NaiveBayes {
        posterior: Unit::Head(h),
        ..
    } = &trained.units.units
    else {
        panic!()
    };
    assert_eq!(h, &crate::model::FeatureHead::zeros(2, 2));
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let head = crate::model::FeatureHead {
        d: 3,
        w: vec![vec![0.2, -0.5, 1.0], vec![0.0, 0.3, -0.7], vec![-1.1, 0.4, 0.05]],
        b: vec![0.1, -0.2, 0.3],
    };
    let xs = [vec![1.0, 2.0, -1.0], vec![-0.5, 0.3, 0.8], vec![2.0, -1.5, 0.1]];
    let batch: Vec<(&[f64], usize)> = xs.iter().zip([0, 2, 1]).map(|(x, y)| (x.as_slice(), y)).collect();
    let (_, g) = head.loss_and_gradient(&batch).unwrap();
    let num = numerical_gradient(&head, &batch, 1e-5).unwrap();
    let diff = g
        .w
        .iter()
        .flatten()
        .zip(num.w.iter().flatten())
        .chain(g.b.iter().zip(&num.b))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-6, "{diff}");
}

#[test]
fn full_batch_loss_is_non_increasing() {
    let data = separable(40, &mut Rng::new(8));
    let cfg = TrainConfig {
        learning_rate: 1e-3,
        momentum: 0.0,
        epochs: 100,
        batch_size: 40,
        ..Default::default()
    };
    let trained = train_feature_head(ModelKind::NaiveBayes, &Alphabet::numbered("c", 2), &data, &cfg).unwrap();
    for w in trained.trace.windows(2) {
        assert!(w[1].loss <= w[0].loss + 1e-15);
    }
}

#[test]
fn non_finite_loss_aborts() {
    let data = vec![
        LabeledSequence::new(vec![0], vec![vec![f64::NAN, 1.0]]),
        LabeledSequence::new(vec![1], vec![vec![1.0, 1.0]]),
    ];
    let r = train_feature_head(ModelKind::NaiveBayes, &Alphabet::numbered("c", 2), &data, &TrainConfig::default());
    assert!(matches!(r, Err(Error::NonFiniteLoss { .. })));
}

#[test]
fn sequence_heads_have_context_dimensions() {
    let mut rng = Rng::new(9);
    let data: Vec<LabeledSequence> = (0..20)
        .map(|i| {
            let x = vec![i % 2, (i / 2) % 2, 1];
            let f: Vec<Vec<f64>> = x.iter().map(|&l| vec![l as f64 + rng.normal() * 0.1]).collect();
            LabeledSequence::new(x, f)
        })
        .collect();
    let cfg = TrainConfig {
        epochs: 5,
        ..Default::default()
    };
    let t = train_feature_head(ModelKind::HmcPlus, &Alphabet::numbered("s", 2), &data, &cfg).unwrap();
    let UnitSet::HmcPlus {
        pair: Unit::Head(p),
        first: Unit::Head(f),
        ..
    } = &t.units.units
    else {
        panic!()
    };
    assert_eq!((p.outputs(), p.d, f.outputs(), f.d), (4, 1, 2, 1));
    assert!(t.units.validate().is_empty());
    let nb: Vec<LabeledSequence> = data.iter().map(|s| LabeledSequence::new(vec![s.labels[0]], s.observations.clone())).collect();
    let t = train_feature_head(ModelKind::PooledMc2, &Alphabet::numbered("s", 2), &nb, &cfg).unwrap();
    let dims: Vec<usize> = t
        .units
        .units
        .posterior_units()
        .iter()
        .map(|(_, u, _)| match u {
            Unit::Head(h) => h.d,
            Unit::Table(_) => 0,
        })
        .collect();
    assert_eq!(dims, vec![1, 2, 1, 3, 2]);
}
