//! Randomized check that both classifier constructions agree with each other and with the
//! enumeration oracle, for every model kind.

use serde::Serialize;

use crate::alphabet::Alphabet;
use crate::error::Result;
use crate::inference::{
    brute_force_map, brute_force_marginals, class_posterior, discriminative_log_weight, hmc2_mpm, hmc2_viterbi,
    hmc_efb_mpm_with, hmc_fb_mpm, hmc_viterbi, hmcplus_mpm_with, hmcplus_viterbi, classify, DecodeResult,
    PairForm, PosteriorMarginals, Scaling, Source,
};
use crate::model::{
    bayes_invert, joint_log_prob_unchecked, kappa_log, DiscriminativeUnits, GenerativeModel, GenerativeTables,
    ModelKind, Table2, Unit,
};
use crate::prob::{normalize, tied};
use crate::sequence::Observations;
use crate::synth::{derive_seed, sample, Rng};

/// Tolerance for posterior and log-weight comparisons.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_labels: usize,
    pub max_symbols: usize,
    pub max_len: usize,
    pub kinds: Vec<ModelKind>,
    /// Corrupts one posterior ratio in every trial, to check that the harness notices.
    pub sabotage: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 100,
            seed: 0,
            max_labels: 4,
            max_symbols: 5,
            max_len: 8,
            kinds: ModelKind::ALL.to_vec(),
            sabotage: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Generative and discriminative argmax agree with the oracle.
    Argmax,
    /// Posteriors of both constructions match the oracle.
    Oracle,
    /// `log κ(y) + log p(x, y)` equals the discriminative log weight.
    Kappa,
    /// Alternative computations of the same posterior agree (EFB and FB for HMC).
    Construction,
}

pub const CHECKS: [Check; 4] = [Check::Argmax, Check::Oracle, Check::Kappa, Check::Construction];

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub kind: ModelKind,
    pub trial: usize,
    /// Replays the trial with [`run_trial`].
    pub seed: u64,
    pub check: Check,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TrialOutcome {
    pub failures: Vec<(Check, String)>,
    /// Largest deviation seen in each tolerance check.
    pub max_oracle_error: f64,
    pub max_kappa_error: f64,
    pub max_construction_error: f64,
}

impl TrialOutcome {
    pub fn passed(&self, check: Check) -> bool {
        !self.failures.iter().any(|(c, _)| *c == check)
    }

    fn fail(&mut self, check: Check, detail: String) {
        self.failures.push((check, detail));
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub kind: ModelKind,
    pub trials: usize,
    pub passed: usize,
    pub argmax: usize,
    pub oracle: usize,
    pub kappa: usize,
    pub construction: usize,
    pub max_oracle_error: f64,
    pub max_kappa_error: f64,
    pub max_construction_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub sabotage: bool,
    pub kinds: Vec<KindReport>,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

fn random_rows(rows: usize, width: usize, rng: &mut Rng) -> Table2 {
    (0..rows)
        .map(|_| normalize(&(0..width).map(|_| 0.05 + rng.uniform()).collect::<Vec<_>>()))
        .collect()
}

fn chunk(rows: Table2, size: usize) -> Vec<Table2> {
    rows.chunks(size).map(<[Vec<f64>]>::to_vec).collect()
}

/// Strictly positive random model with `n` labels and `m` symbols.
pub fn random_model(kind: ModelKind, n: usize, m: usize, rng: &mut Rng) -> GenerativeModel {
    let vector = |len: usize, rng: &mut Rng| random_rows(1, len, rng).remove(0);
    let tables = match kind {
        ModelKind::NaiveBayes => GenerativeTables::NaiveBayes {
            prior: vector(n, rng),
            emission: random_rows(n, m, rng),
        },
        ModelKind::PooledMc => GenerativeTables::PooledMc {
            prior: vector(n, rng),
            first: random_rows(n, m, rng),
            next: chunk(random_rows(n * m, m, rng), m),
        },
        ModelKind::PooledMc2 => GenerativeTables::PooledMc2 {
            prior: vector(n, rng),
            first: random_rows(n, m, rng),
            second: chunk(random_rows(n * m, m, rng), m),
            next: chunk(random_rows(n * m * m, m, rng), m)
                .chunks(m)
                .map(<[Table2]>::to_vec)
                .collect(),
        },
        ModelKind::Hmc => GenerativeTables::Hmc {
            initial: vector(n, rng),
            transition: random_rows(n, n, rng),
            emission: random_rows(n, m, rng),
        },
        ModelKind::Hmc2 => GenerativeTables::Hmc2 {
            initial: vector(n, rng),
            transition: random_rows(n, n, rng),
            transition2: chunk(random_rows(n * n, n, rng), n),
            emission: random_rows(n, m, rng),
        },
        ModelKind::HmcPlus => GenerativeTables::HmcPlus {
            initial: vector(n, rng),
            transition: random_rows(n, n, rng),
            first_emission: random_rows(n, m, rng),
            emission: chunk(random_rows(n * n, m, rng), n),
        },
    };
    GenerativeModel::new(Alphabet::numbered("x", n), Alphabet::numbered("y", m), tables)
}

/// Swaps the first two entries of the first posterior unit's row for `y_1`.
fn sabotage(units: &mut DiscriminativeUnits, y0: usize) {
    if let Some(Unit::Table(t)) = units.units.posterior_units_mut().into_iter().next() {
        for rows in &mut t.positions {
            rows[y0].swap(0, 1);
        }
    }
}

struct Answers {
    gen_marginals: PosteriorMarginals,
    dis_marginals: PosteriorMarginals,
    /// MAP for the HMC family, the class for the naive Bayes family.
    gen_decode: DecodeResult,
    dis_decode: DecodeResult,
    /// Alternative discriminative or generative posteriors that must agree with `dis_marginals`.
    alternatives: Vec<(&'static str, PosteriorMarginals)>,
}

fn one(p: crate::prob::Categorical) -> PosteriorMarginals {
    PosteriorMarginals { positions: vec![p] }
}

fn answers(model: &GenerativeModel, units: &DiscriminativeUnits, obs: &Observations) -> Result<Answers> {
    let g = Source::Generative(model);
    let d = Source::Discriminative(units);
    Ok(match model.kind() {
        ModelKind::NaiveBayes | ModelKind::PooledMc | ModelKind::PooledMc2 => Answers {
            gen_marginals: one(class_posterior(g, obs)?),
            dis_marginals: one(class_posterior(d, obs)?),
            gen_decode: classify(g, obs)?,
            dis_decode: classify(d, obs)?,
            alternatives: Vec::new(),
        },
        ModelKind::Hmc => {
            let (fb, _) = hmc_fb_mpm(model, obs)?;
            let efb = hmc_efb_mpm_with(units, obs, Scaling::Rescale)?;
            let raw = hmc_efb_mpm_with(units, obs, Scaling::None)?;
            let logs = hmc_efb_mpm_with(units, obs, Scaling::LogSpace)?;
            Answers {
                alternatives: vec![("fb", fb.clone()), ("efb-unscaled", raw.marginals), ("efb-log", logs.marginals)],
                gen_marginals: fb,
                dis_marginals: efb.marginals,
                gen_decode: hmc_viterbi(g, obs)?,
                dis_decode: hmc_viterbi(d, obs)?,
            }
        }
        ModelKind::Hmc2 => Answers {
            gen_marginals: hmc2_mpm(g, obs)?.0,
            dis_marginals: hmc2_mpm(d, obs)?.0,
            gen_decode: hmc2_viterbi(g, obs)?,
            dis_decode: hmc2_viterbi(d, obs)?,
            alternatives: vec![("generative", hmc2_mpm(g, obs)?.0)],
        },
        ModelKind::HmcPlus => {
            let gen = hmcplus_mpm_with(g, obs, PairForm::PairMarginal)?.0;
            Answers {
                alternatives: vec![
                    ("single-marginal form", hmcplus_mpm_with(d, obs, PairForm::SingleMarginal)?.0),
                    ("generative", gen.clone()),
                ],
                gen_marginals: gen,
                dis_marginals: hmcplus_mpm_with(d, obs, PairForm::PairMarginal)?.0,
                gen_decode: hmcplus_viterbi(g, obs)?,
                dis_decode: hmcplus_viterbi(d, obs)?,
            }
        }
    })
}

fn check_mpm(out: &mut TrialOutcome, name: &str, decided: &PosteriorMarginals, oracle: &PosteriorMarginals) {
    for (t, (p, o)) in decided.positions.iter().zip(&oracle.positions).enumerate() {
        let chosen = p.argmax();
        let best = o.argmax();
        if chosen != best && !tied(o.probs()[best], o.probs()[chosen]) {
            out.fail(
                Check::Argmax,
                format!("{name}: position {} chose {chosen}, oracle {best}", t + 1),
            );
        }
    }
}

fn check_map(out: &mut TrialOutcome, name: &str, labels: &[usize], oracle: &DecodeResult, model: &GenerativeModel, y: &[usize]) {
    if labels != oracle.labels.as_slice() {
        let lp = joint_log_prob_unchecked(&model.tables, labels, y);
        if !tied(oracle.score, lp) {
            out.fail(
                Check::Argmax,
                format!("{name}: path {labels:?} (log p {lp}), oracle {:?} (log p {})", oracle.labels, oracle.score),
            );
        }
    }
}

fn run_checks(model: &GenerativeModel, units: &DiscriminativeUnits, y: &[usize], x: &[usize], rng: &mut Rng) -> Result<TrialOutcome> {
    let mut out = TrialOutcome::default();
    let obs: Observations = y.to_vec().into();
    let a = answers(model, units, &obs)?;
    let oracle = brute_force_marginals(model, y)?;
    let oracle_map = brute_force_map(model, y)?;
    let sequential = model.kind().is_sequential();

    check_mpm(&mut out, "generative posterior", &a.gen_marginals, &oracle);
    check_mpm(&mut out, "discriminative posterior", &a.dis_marginals, &oracle);
    if sequential {
        check_map(&mut out, "generative MAP", &a.gen_decode.labels, &oracle_map, model, y);
        check_map(&mut out, "discriminative MAP", &a.dis_decode.labels, &oracle_map, model, y);
        if a.gen_decode.labels != a.dis_decode.labels {
            let lg = joint_log_prob_unchecked(&model.tables, &a.gen_decode.labels, y);
            let ld = joint_log_prob_unchecked(&model.tables, &a.dis_decode.labels, y);
            if !tied(lg, ld) {
                out.fail(Check::Argmax, "generative and discriminative MAP paths differ".into());
            }
        }
    } else {
        let best = oracle.positions[0].argmax();
        let probs = oracle.positions[0].probs();
        for (name, r) in [("generative", &a.gen_decode), ("discriminative", &a.dis_decode)] {
            let c = r.labels[0];
            if c != best && !tied(probs[best], probs[c]) {
                out.fail(Check::Argmax, format!("{name} class {c}, oracle {best}"));
            }
        }
    }

    for (name, m) in [("generative", &a.gen_marginals), ("discriminative", &a.dis_marginals)] {
        let e = m.max_abs_diff(&oracle);
        out.max_oracle_error = out.max_oracle_error.max(e);
        if !(e <= TOLERANCE) {
            out.fail(Check::Oracle, format!("{name} posterior off the oracle by {e:e}"));
        }
    }

    let kappa = kappa_log(model, y)?;
    let n = model.num_labels();
    let len = x.len();
    let mut configs = vec![x.to_vec()];
    for _ in 0..3 {
        configs.push((0..len).map(|_| (rng.uniform() * n as f64) as usize).collect());
    }
    for cfg in &configs {
        let lhs = kappa.log_kappa + joint_log_prob_unchecked(&model.tables, cfg, y);
        let rhs = discriminative_log_weight(units, cfg, &obs)?;
        let e = (lhs - rhs).abs();
        out.max_kappa_error = out.max_kappa_error.max(if e.is_nan() { f64::INFINITY } else { e });
        if !(e <= TOLERANCE) {
            out.fail(Check::Kappa, format!("x = {cfg:?}: log κ + log p(x,y) = {lhs}, ratio form = {rhs}"));
        }
    }

    let mut alternatives = a.alternatives;
    if alternatives.is_empty() {
        alternatives.push(("generative", a.gen_marginals.clone()));
    }
    for (name, m) in &alternatives {
        let e = m.max_abs_diff(&a.dis_marginals);
        out.max_construction_error = out.max_construction_error.max(e);
        if !(e <= TOLERANCE) {
            out.fail(Check::Construction, format!("{name} differs from the discriminative posterior by {e:e}"));
        }
    }
    Ok(out)
}

/// One trial: a random model, a sequence drawn from it, and every check. The seed alone
/// determines the trial.
pub fn run_trial(kind: ModelKind, seed: u64, cfg: &VerifyConfig) -> TrialOutcome {
    let mut rng = Rng::new(seed);
    let n = 2 + (rng.uniform() * (cfg.max_labels.max(2) - 1) as f64) as usize;
    let m = 2 + (rng.uniform() * (cfg.max_symbols.max(2) - 1) as f64) as usize;
    let t_len = 1 + (rng.uniform() * cfg.max_len.max(1) as f64) as usize;
    let model = random_model(kind, n, m, &mut rng);
    let result = (|| {
        let seq = sample(&model, t_len, &mut rng)?;
        let y = seq.observations.symbols().expect("sampled symbols").to_vec();
        let mut units = bayes_invert(&model, t_len)?;
        if cfg.sabotage {
            sabotage(&mut units, y[0]);
        }
        run_checks(&model, &units, &y, &seq.labels, &mut rng)
    })();
    match result {
        Ok(out) => out,
        Err(e) => TrialOutcome {
            failures: CHECKS.iter().map(|&c| (c, format!("error: {e}"))).collect(),
            max_oracle_error: f64::INFINITY,
            max_kappa_error: f64::INFINITY,
            max_construction_error: f64::INFINITY,
        },
    }
}

/// Seed of trial `trial` for `kind` under the run seed.
pub fn trial_seed(seed: u64, kind: ModelKind, trial: usize) -> u64 {
    let k = ModelKind::ALL.iter().position(|&x| x == kind).expect("known kind") as u64;
    derive_seed(seed, (k << 32) | trial as u64)
}

pub fn run(cfg: &VerifyConfig) -> VerifyReport {
    let mut kinds = Vec::new();
    let mut failures = Vec::new();
    for &kind in &cfg.kinds {
        let mut r = KindReport {
            kind,
            trials: cfg.trials,
            passed: 0,
            argmax: 0,
            oracle: 0,
            kappa: 0,
            construction: 0,
            max_oracle_error: 0.0,
            max_kappa_error: 0.0,
            max_construction_error: 0.0,
        };
        for trial in 0..cfg.trials {
            let seed = trial_seed(cfg.seed, kind, trial);
            let out = run_trial(kind, seed, cfg);
            r.argmax += usize::from(out.passed(Check::Argmax));
            r.oracle += usize::from(out.passed(Check::Oracle));
            r.kappa += usize::from(out.passed(Check::Kappa));
            r.construction += usize::from(out.passed(Check::Construction));
            r.passed += usize::from(out.failures.is_empty());
            r.max_oracle_error = r.max_oracle_error.max(out.max_oracle_error);
            r.max_kappa_error = r.max_kappa_error.max(out.max_kappa_error);
            r.max_construction_error = r.max_construction_error.max(out.max_construction_error);
            failures.extend(out.failures.into_iter().map(|(check, detail)| Failure {
                kind,
                trial,
                seed,
                check,
                detail,
            }));
        }
        kinds.push(r);
    }
    VerifyReport {
        seed: cfg.seed,
        trials: cfg.trials,
        sabotage: cfg.sabotage,
        passed: failures.is_empty(),
        kinds,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sabotage: bool) -> VerifyConfig {
        VerifyConfig {
            trials: 10,
            seed: 3,
            sabotage,
            ..Default::default()
        }
    }

    #[test]
    fn clean_run_passes() {
        let report = run(&small(false));
        assert!(report.passed, "{:?}", report.failures.first());
        assert_eq!(report.kinds.len(), 6);
    }

    #[test]
    fn sabotage_is_caught_with_seeds() {
        let report = run(&small(true));
        assert!(!report.passed);
        for k in &report.kinds {
            assert!(k.passed < k.trials, "{}", k.kind);
        }
        let f = &report.failures[0];
        assert!(!run_trial(f.kind, f.seed, &small(true)).failures.is_empty());
        assert!(run_trial(f.kind, f.seed, &small(false)).failures.is_empty());
    }

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&run(&small(false))).unwrap();
        let b = serde_json::to_string(&run(&small(false))).unwrap();
        assert_eq!(a, b);
    }
}
