use gendisc::inference::{discriminative_log_weight, hmc_efb_mpm_with, hmc_fb_mpm, Scaling};
use gendisc::model::{bayes_invert, joint_log_prob, kappa_log, GenerativeModel, GenerativeTables, ModelKind};
use gendisc::synth::{sample, sample_corpus, Rng};
use gendisc::verify::random_model;
use gendisc::LabeledSequence;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(ModelKind::ALL.to_vec())
}

fn setup() -> impl Strategy<Value = (ModelKind, u64, usize, usize, usize)> {
    (kind(), any::<u64>(), 2usize..=3, 2usize..=3, 1usize..=4)
}

/// All `N^L × M^T` configurations, with `L = 1` for the document kinds.
fn all_configs(kind: ModelKind, n: usize, m: usize, t: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let l = if kind.is_sequential() { t } else { 1 };
    let digits = |base: usize, len: usize, mut k: usize| {
        let mut v = vec![0; len];
        for slot in v.iter_mut().rev() {
            *slot = k % base;
            k /= base;
        }
        v
    };
    let mut out = Vec::new();
    for a in 0..n.pow(l as u32) {
        for b in 0..m.pow(t as u32) {
            out.push((digits(n, l, a), digits(m, t, b)));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn joint_sums_to_one((k, seed, n, m, t) in setup()) {
        let model = random_model(k, n, m, &mut Rng::new(seed));
        let total: f64 = all_configs(k, n, m, t)
            .into_iter()
            .map(|(x, y)| joint_log_prob(&model, &LabeledSequence::new(x, y)).unwrap().exp())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "total {total}");
    }

    #[test]
    fn kappa_aligns_joint_and_ratio_product((k, seed, n, m, t) in setup(), pick in any::<u64>()) {
        let model = random_model(k, n, m, &mut Rng::new(seed));
        let units = bayes_invert(&model, t).unwrap();
        let configs = all_configs(k, n, m, t);
        let (x, y) = &configs[(pick % configs.len() as u64) as usize];
        let kappa = kappa_log(&model, y).unwrap();
        let lhs = kappa.log_kappa + joint_log_prob(&model, &LabeledSequence::new(x.clone(), y.clone())).unwrap();
        let rhs = discriminative_log_weight(&units, x, &y.clone().into()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn scaling_choice_does_not_change_efb(seed in any::<u64>(), n in 2usize..=4, m in 2usize..=5, t in 1usize..=30) {
        let mut rng = Rng::new(seed);
        let model = random_model(ModelKind::Hmc, n, m, &mut rng);
        let seq = sample(&model, t, &mut rng).unwrap();
        let units = bayes_invert(&model, t).unwrap();
        let a = hmc_efb_mpm_with(&units, &seq.observations, Scaling::Rescale).unwrap();
        let b = hmc_efb_mpm_with(&units, &seq.observations, Scaling::LogSpace).unwrap();
        let (fb, _) = hmc_fb_mpm(&model, &seq.observations).unwrap();
        prop_assert!(a.marginals.max_abs_diff(&b.marginals) < 1e-9);
        prop_assert!(a.marginals.max_abs_diff(&fb) < 1e-9);
        prop_assert_eq!(a.decode.labels, b.decode.labels);
    }

    #[test]
    fn relabeling_permutes_posteriors(seed in any::<u64>(), n in 2usize..=4, t in 1usize..=8) {
        let mut rng = Rng::new(seed);
        let model = random_model(ModelKind::Hmc, n, 3, &mut rng);
        let seq = sample(&model, t, &mut rng).unwrap();
        let perm = |i: usize| n - 1 - i;
        let mut flipped = model.clone();
        if let (
            GenerativeTables::Hmc { initial, transition, emission },
            GenerativeTables::Hmc { initial: i0, transition: a0, emission: b0 },
        ) = (&mut flipped.tables, &model.tables)
        {
            for x in 0..n {
                initial[perm(x)] = i0[x];
                emission[perm(x)] = b0[x].clone();
                for z in 0..n {
                    transition[perm(x)][perm(z)] = a0[x][z];
                }
            }
        }
        let (p, _) = hmc_fb_mpm(&model, &seq.observations).unwrap();
        let (q, _) = hmc_fb_mpm(&flipped, &seq.observations).unwrap();
        for (a, b) in p.positions.iter().zip(&q.positions) {
            for x in 0..n {
                prop_assert!((a.probs()[x] - b.probs()[perm(x)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic((k, seed, n, m, t) in setup()) {
        let model: GenerativeModel = random_model(k, n, m, &mut Rng::new(seed));
        prop_assert_eq!(sample_corpus(&model, 4, t, seed).unwrap(), sample_corpus(&model, 4, t, seed).unwrap());
    }
}
