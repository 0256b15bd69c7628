use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use gendisc::data::{self, DataFormat, Record, Tokens};
use gendisc::estimation::{fit_discriminative_tables, fit_generative, train_feature_head, TrainConfig};
use gendisc::inference::{class_posterior, predict as decide, Algorithm, Construction, Source};
use gendisc::metrics::evaluate;
use gendisc::model::{bayes_invert, joint_log_prob, ModelFile, ModelKind};
use gendisc::synth::{make_feature_task, sample_corpus, FeatureTaskConfig, Rng};
use gendisc::verify::{self, run_trial, VerifyConfig};
use serde_json::json;

use crate::{EvalArgs, FeatureTaskArgs, FitArgs, InvertArgs, PredictArgs, SampleArgs, VerifyArgs};

fn report(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load_model(path: &Path) -> Result<ModelFile> {
    ModelFile::load(path).with_context(|| format!("cannot load model `{}`", path.display()))
}

fn read_records(path: &Path, format: DataFormat) -> Result<Vec<Record>> {
    data::read(path, format).with_context(|| format!("cannot read data `{}`", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

fn token_count(records: &[Record]) -> usize {
    records.iter().map(|r| r.tokens.len()).sum()
}

/// Guesses the format of a labeled file: JSON lines by extension, tagged sequences when blank
/// lines separate records, documents when a second column holds several tokens.
fn sniff(path: &Path) -> Result<DataFormat> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        return Ok(DataFormat::Features);
    }
    let text = fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))?;
    let lines: Vec<&str> = text.lines().collect();
    let last = lines.iter().rposition(|l| !l.trim().is_empty()).unwrap_or(0);
    if lines[..last].iter().any(|l| l.trim().is_empty()) {
        return Ok(DataFormat::Tagged);
    }
    if lines
        .iter()
        .any(|l| l.split_once('\t').is_some_and(|(_, rest)| rest.trim().contains(char::is_whitespace)))
    {
        return Ok(DataFormat::Documents);
    }
    bail!(
        "cannot tell whether `{}` holds tagged sequences or documents; pass --format",
        path.display()
    )
}

pub fn sample(a: SampleArgs) -> Result<ExitCode> {
    let model = match load_model(&a.model)? {
        ModelFile::Generative(m) => m,
        ModelFile::Discriminative(_) => bail!("sampling needs a generative model; `{}` holds posterior units", a.model.display()),
    };
    let seqs = sample_corpus(&model, a.num as usize, a.len as usize, a.seed)?;
    let format = if model.kind().is_sequential() {
        DataFormat::Tagged
    } else {
        DataFormat::Documents
    };
    let records = data::decode_sequences(&seqs, &model.labels, Some(&model.observations));
    write(&a.output, &data::render(&records, format)?)?;
    report(&json!({
        "output": a.output,
        "kind": model.kind().name(),
        "seed": a.seed,
        "sequences": seqs.len(),
        "tokens": token_count(&records),
    }))?;
    Ok(ExitCode::SUCCESS)
}

pub fn fit(a: FitArgs) -> Result<ExitCode> {
    let kind: ModelKind = a.kind.into();
    let format = a.format.map_or_else(|| DataFormat::infer(&a.data, kind), Into::into);
    let records = read_records(&a.data, format)?;
    let cfg = TrainConfig {
        smoothing_alpha: a.smoothing,
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: a.seed,
        momentum: a.momentum,
        marginals: a.marginals.into(),
    };
    let (labels, observations) = data::alphabets(&records)?;
    let features = format == DataFormat::Features;
    let construction = a.construction.map_or(
        if features {
            Construction::Discriminative
        } else {
            Construction::Generative
        },
        Into::into,
    );
    let seqs = data::encode(&records, kind, &labels, observations.as_ref(), true)
        .with_context(|| format!("`{}` does not fit a {kind} model", a.data.display()))?;
    let file = if features {
        if construction == Construction::Generative {
            bail!("feature vectors have no generative tables; fit them with --construction discriminative");
        }
        let trained = train_feature_head(kind, &labels, &seqs, &cfg)?;
        if let Some(log) = &a.log {
            let mut text = String::new();
            for r in &trained.trace {
                text.push_str(&serde_json::to_string(r)?);
                text.push('\n');
            }
            write(log, &text)?;
        }
        if let Some(last) = trained.trace.last() {
            eprintln!("trained {} head(s); final loss of `{}`: {:.6}", trained.units.units.posterior_units().len(), last.unit, last.loss);
        }
        ModelFile::Discriminative(trained.units)
    } else {
        let observations = observations.expect("token data has a symbol alphabet");
        match construction {
            Construction::Generative => ModelFile::Generative(fit_generative(kind, &labels, &observations, &seqs, &cfg)?),
            Construction::Discriminative => {
                ModelFile::Discriminative(fit_discriminative_tables(kind, &labels, &observations, &seqs, &cfg)?)
            }
        }
    };
    file.save(&a.output)
        .with_context(|| format!("cannot write `{}`", a.output.display()))?;
    let dev = match &a.dev {
        Some(path) => Some(score_dev(&file, path, format)?),
        None => None,
    };
    report(&json!({
        "output": a.output,
        "kind": kind.name(),
        "construction": construction.to_string(),
        "sequences": records.len(),
        "tokens": token_count(&records),
        "labels": labels.names(),
        "dev": dev,
    }))?;
    Ok(ExitCode::SUCCESS)
}

/// Held-out log-likelihood `Σ log p(x, y)` for generative models; accuracy and, for the
/// naive Bayes family, the conditional log-likelihood `Σ log p(x | y)` for units.
fn score_dev(file: &ModelFile, path: &Path, format: DataFormat) -> Result<serde_json::Value> {
    let records = read_records(path, format)?;
    let (labels, observations) = match file {
        ModelFile::Generative(m) => (&m.labels, Some(&m.observations)),
        ModelFile::Discriminative(u) => (&u.labels, u.observations.as_ref()),
    };
    let seqs = data::encode(&records, file.kind(), labels, observations, true)
        .with_context(|| format!("cannot score `{}`", path.display()))?;
    let tokens = token_count(&records);
    Ok(match file {
        ModelFile::Generative(m) => {
            let ll = seqs.iter().map(|s| joint_log_prob(m, s)).sum::<gendisc::Result<f64>>()?;
            json!({
                "sequences": seqs.len(),
                "tokens": tokens,
                "log_likelihood": ll,
                "log_likelihood_per_token": ll / tokens as f64,
            })
        }
        ModelFile::Discriminative(u) => {
            let source = Source::Discriminative(u);
            let mut correct = 0usize;
            let mut total = 0usize;
            let mut cll = 0.0;
            for s in &seqs {
                let pred = decide(source, &s.observations, Algorithm::Mpm)?;
                correct += pred.labels.iter().zip(&s.labels).filter(|(a, b)| a == b).count();
                total += s.labels.len();
                if !u.kind().is_sequential() {
                    cll += class_posterior(source, &s.observations)?.probs()[s.labels[0]].ln();
                }
            }
            json!({
                "sequences": seqs.len(),
                "tokens": tokens,
                "accuracy": correct as f64 / total as f64,
                "conditional_log_likelihood": (!u.kind().is_sequential()).then_some(cll),
            })
        }
    })
}

pub fn predict(a: PredictArgs) -> Result<ExitCode> {
    let file = load_model(&a.model)?;
    let kind = file.kind();
    let format = a.format.map_or_else(|| DataFormat::infer(&a.data, kind), Into::into);
    let records = read_records(&a.data, format)?;
    let construction = a.construction.map_or(
        match file {
            ModelFile::Generative(_) => Construction::Generative,
            ModelFile::Discriminative(_) => Construction::Discriminative,
        },
        Into::into,
    );
    let algorithm: Algorithm = a.algorithm.into();
    let inverted;
    let (source, labels, observations) = match (&file, construction) {
        (ModelFile::Generative(m), Construction::Generative) => (Source::Generative(m), &m.labels, Some(&m.observations)),
        (ModelFile::Discriminative(_), Construction::Generative) => {
            bail!("`{}` holds posterior units, which only support --construction discriminative", a.model.display())
        }
        (ModelFile::Generative(m), Construction::Discriminative) => {
            let horizon = records.iter().map(|r| r.tokens.len()).max().unwrap_or(1);
            inverted = bayes_invert(m, horizon)?;
            eprintln!("note: inverted the generative model into posterior units (horizon {horizon}) for the discriminative construction");
            (Source::Discriminative(&inverted), &m.labels, Some(&m.observations))
        }
        (ModelFile::Discriminative(u), Construction::Discriminative) => {
            (Source::Discriminative(u), &u.labels, u.observations.as_ref())
        }
    };
    let seqs = data::encode(&records, kind, labels, observations, false)?;
    let mut out = Vec::with_capacity(records.len());
    let mut ties = 0;
    for (r, s) in records.iter().zip(&seqs) {
        let d = decide(source, &s.observations, algorithm)
            .with_context(|| format!("cannot label the record at line {}", r.line))?;
        ties += d.ties_broken;
        out.push(Record {
            line: r.line,
            tokens: r.tokens.clone(),
            labels: Some(d.labels.iter().map(|&x| labels.name(x).to_string()).collect()),
        });
    }
    write(&a.output, &data::render(&out, format)?)?;
    report(&json!({
        "output": a.output,
        "kind": kind.name(),
        "construction": construction.to_string(),
        "algorithm": match algorithm {
            Algorithm::Map => "map",
            Algorithm::Mpm => "mpm",
        },
        "inverted": inverted_flag(&file, construction),
        "sequences": out.len(),
        "tokens": token_count(&out),
        "ties_broken": ties,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn inverted_flag(file: &ModelFile, construction: Construction) -> bool {
    matches!(file, ModelFile::Generative(_)) && construction == Construction::Discriminative
}

pub fn eval(a: EvalArgs) -> Result<ExitCode> {
    let format = match a.format {
        Some(f) => f.into(),
        None => sniff(&a.gold)?,
    };
    let pred = read_records(&a.pred, format)?;
    let gold = read_records(&a.gold, format)?;
    let metrics = evaluate(&pred, &gold)?;
    report(&serde_json::to_value(&metrics)?)?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let kinds: Vec<ModelKind> = if a.kinds.is_empty() {
        ModelKind::ALL.to_vec()
    } else {
        a.kinds.iter().map(|&k| k.into()).collect()
    };
    let cfg = VerifyConfig {
        trials: a.trials,
        seed: a.seed,
        sabotage: a.sabotage,
        kinds: kinds.clone(),
        ..Default::default()
    };
    if let Some(seed) = a.replay {
        let mut failed = false;
        let mut outcomes = Vec::new();
        for &kind in &kinds {
            let out = run_trial(kind, seed, &cfg);
            failed |= !out.failures.is_empty();
            for (check, detail) in &out.failures {
                eprintln!("{kind} seed {seed}: {check:?} failed: {detail}");
            }
            outcomes.push(json!({"kind": kind.name(), "seed": seed, "outcome": out}));
        }
        report(&json!(outcomes))?;
        return Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS });
    }
    let r = verify::run(&cfg);
    eprintln!("{:<10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}", "kind", "trials", "passed", "argmax", "oracle", "kappa", "constr");
    for k in &r.kinds {
        eprintln!(
            "{:<10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
            k.kind.name(),
            k.trials,
            k.passed,
            k.argmax,
            k.oracle,
            k.kappa,
            k.construction
        );
    }
    report(&serde_json::to_value(&r)?)?;
    if r.passed {
        return Ok(ExitCode::SUCCESS);
    }
    let mut seen = Vec::new();
    for f in &r.failures {
        if seen.contains(&(f.kind, f.seed)) {
            continue;
        }
        seen.push((f.kind, f.seed));
        if seen.len() <= 5 {
            eprintln!(
                "FAILED {} trial {} seed {}: {:?}: {}\n  replay: gendisc verify --kinds {} --replay {}{}",
                f.kind,
                f.trial,
                f.seed,
                f.check,
                f.detail,
                f.kind.name(),
                f.seed,
                if a.sabotage { " --sabotage" } else { "" }
            );
        }
    }
    eprintln!("{} failing trial(s)", seen.len());
    Ok(ExitCode::FAILURE)
}

pub fn invert(a: InvertArgs) -> Result<ExitCode> {
    let model = match load_model(&a.model)? {
        ModelFile::Generative(m) => m,
        ModelFile::Discriminative(_) => bail!("`{}` already holds posterior units", a.model.display()),
    };
    let units = bayes_invert(&model, a.horizon as usize)?;
    let file = ModelFile::Discriminative(units);
    file.save(&a.output)
        .with_context(|| format!("cannot write `{}`", a.output.display()))?;
    report(&json!({"output": a.output, "kind": model.kind().name(), "horizon": a.horizon}))?;
    Ok(ExitCode::SUCCESS)
}

pub fn feature_task(a: FeatureTaskArgs) -> Result<ExitCode> {
    let cfg = FeatureTaskConfig {
        n_classes: a.classes as usize,
        d: a.dim as usize,
        separation: a.separation,
        noise: a.noise,
        mix_offset: a.offset,
        n_points: a.points,
    };
    let task = make_feature_task(&cfg, &mut Rng::new(a.seed));
    let labels = task.labels();
    let features = data::decode_sequences(&task.feature_sequences(), &labels, None);
    write(&a.output, &data::render(&features, DataFormat::Features)?)?;
    if let Some(path) = &a.symbols {
        let symbols = task.symbol_set();
        let docs = data::decode_sequences(&task.symbol_sequences(), &labels, Some(&symbols));
        write(path, &data::render(&docs, DataFormat::Documents)?)?;
    }
    let dims = features.first().map_or(0, |r| match &r.tokens {
        Tokens::Features(v) => v[0].len(),
        Tokens::Symbols(_) => 0,
    });
    report(&json!({
        "output": a.output,
        "symbols": a.symbols,
        "points": features.len(),
        "classes": cfg.n_classes,
        "dimension": dims,
        "seed": a.seed,
    }))?;
    Ok(ExitCode::SUCCESS)
}
