//! WebAssembly entry points for `www/index.html`. Each operation takes plain values and
//! returns a JSON string; the `*_json` functions are the same operations for native use.

use gendisc::estimation::{fit_generative, train_feature_head, TrainConfig};
use gendisc::inference::{
    hmc_efb_mpm_with, hmc_fb_mpm, hmc_viterbi, nb_classify_generative, predict, Algorithm, Scaling, Source,
};
use gendisc::model::{bayes_invert, kappa_log, GenerativeModel, ModelFile, ModelKind};
use gendisc::synth::{make_feature_task, FeatureTaskConfig, Rng};
use gendisc::verify::{self, VerifyConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Two-state weather HMC used as the page's starting model.
pub const DEFAULT_MODEL: &str = r#"{
  "schema_version": 1,
  "model_type": "generative",
  "kind": "hmc",
  "labels": ["rain", "sun"],
  "observations": ["clean", "shop", "walk"],
  "tables": {
    "initial": [0.6, 0.4],
    "transition": [[0.7, 0.3], [0.4, 0.6]],
    "emission": [[0.5, 0.4, 0.1], [0.1, 0.3, 0.6]]
  }
}"#;

fn hmc(model_json: &str) -> Result<GenerativeModel, String> {
    match ModelFile::from_json_str(model_json).map_err(|e| e.to_string())? {
        ModelFile::Generative(m) if m.kind() == ModelKind::Hmc => Ok(m),
        ModelFile::Generative(m) => Err(format!("the demo decodes HMC models, got {}", m.kind())),
        ModelFile::Discriminative(_) => Err("the demo needs a generative model".into()),
    }
}

/// Posterior marginals by classic forward-backward and by the ratio recursion, plus both
/// Viterbi paths, for whitespace-separated observation names.
pub fn decode_hmc_json(model_json: &str, observations: &str) -> Result<String, String> {
    let model = hmc(model_json)?;
    let y: Vec<usize> = observations
        .split_whitespace()
        .map(|tok| {
            model
                .observations
                .index(tok)
                .ok_or_else(|| format!("unknown observation `{tok}`; known: {}", model.observations.names().join(", ")))
        })
        .collect::<Result<_, _>>()?;
    if y.is_empty() {
        return Err("enter at least one observation".into());
    }
    let obs = y.clone().into();
    let units = bayes_invert(&model, y.len()).map_err(|e| e.to_string())?;
    let (fb, _) = hmc_fb_mpm(&model, &obs).map_err(|e| e.to_string())?;
    let efb = hmc_efb_mpm_with(&units, &obs, Scaling::LogSpace).map_err(|e| e.to_string())?;
    let vg = hmc_viterbi(Source::Generative(&model), &obs).map_err(|e| e.to_string())?;
    let vd = hmc_viterbi(Source::Discriminative(&units), &obs).map_err(|e| e.to_string())?;
    let names = |xs: &[usize]| xs.iter().map(|&x| model.labels.name(x).to_string()).collect::<Vec<_>>();
    let rows = |m: &gendisc::inference::PosteriorMarginals| {
        m.positions.iter().map(|p| p.probs().to_vec()).collect::<Vec<_>>()
    };
    Ok(json!({
        "labels": model.labels.names(),
        "observations": observations.split_whitespace().collect::<Vec<_>>(),
        "forward_backward": rows(&fb),
        "ratio_recursion": rows(&efb.marginals),
        "max_difference": fb.max_abs_diff(&efb.marginals),
        "mpm": names(&efb.decode.labels),
        "viterbi_generative": names(&vg.labels),
        "viterbi_discriminative": names(&vd.labels),
        "score_generative": vg.score,
        "score_discriminative": vd.score,
        "log_kappa": kappa_log(&model, &y).map_err(|e| e.to_string())?.log_kappa,
    })
    .to_string())
}

/// Accuracy of the feature-head classifier and of naive Bayes on the two-bin quantized
/// tokens, on a fresh draw of the feature task.
pub fn feature_gap_json(separation: f64, noise: f64, offset: f64, dim: usize, seed: u64) -> Result<String, String> {
    if dim < 2 || dim > 64 {
        return Err("dimension must be between 2 and 64".into());
    }
    if !(noise > 0.0) || !separation.is_finite() || !offset.is_finite() {
        return Err("noise must be positive and all parameters finite".into());
    }
    let (train_n, test_n) = (2000, 1000);
    let task = make_feature_task(
        &FeatureTaskConfig {
            n_classes: 2,
            d: dim,
            separation,
            noise,
            mix_offset: offset,
            n_points: train_n + test_n,
        },
        &mut Rng::new(seed),
    );
    let labels = task.labels();
    let features = task.feature_sequences();
    let symbols = task.symbol_sequences();
    let cfg = TrainConfig {
        epochs: 20,
        ..Default::default()
    };
    let heads = train_feature_head(ModelKind::NaiveBayes, &labels, &features[..train_n], &cfg).map_err(|e| e.to_string())?;
    let nb = fit_generative(ModelKind::NaiveBayes, &labels, &task.symbol_set(), &symbols[..train_n], &cfg)
        .map_err(|e| e.to_string())?;
    let mut head_hits = 0;
    let mut nb_hits = 0;
    for (f, s) in features[train_n..].iter().zip(&symbols[train_n..]) {
        let h = predict(Source::Discriminative(&heads.units), &f.observations, Algorithm::Mpm).map_err(|e| e.to_string())?;
        let g = nb_classify_generative(&nb, s.observations.symbols().expect("tokens")).map_err(|e| e.to_string())?;
        head_hits += usize::from(h.labels == f.labels);
        nb_hits += usize::from(g.labels == s.labels);
    }
    Ok(json!({
        "train": train_n,
        "test": test_n,
        "head_accuracy": head_hits as f64 / test_n as f64,
        "quantized_accuracy": nb_hits as f64 / test_n as f64,
        "final_loss": heads.trace.last().map(|r| r.loss),
    })
    .to_string())
}

/// Per-kind pass counts of the random-model verifier.
pub fn verify_json(trials: usize, seed: u64, sabotage: bool) -> Result<String, String> {
    if trials == 0 || trials > 200 {
        return Err("trials must be between 1 and 200".into());
    }
    let r = verify::run(&VerifyConfig {
        trials,
        seed,
        sabotage,
        ..Default::default()
    });
    let first = r.failures.first().map(|f| {
        json!({"kind": f.kind.name(), "trial": f.trial, "seed": f.seed.to_string(), "check": format!("{:?}", f.check), "detail": f.detail})
    });
    Ok(json!({"passed": r.passed, "kinds": r.kinds, "failures": r.failures.len(), "first_failure": first}).to_string())
}

#[wasm_bindgen]
pub fn default_model() -> String {
    DEFAULT_MODEL.to_string()
}

#[wasm_bindgen]
pub fn decode_hmc(model_json: &str, observations: &str) -> Result<String, JsValue> {
    decode_hmc_json(model_json, observations).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn feature_gap(separation: f64, noise: f64, offset: f64, dim: usize, seed: u32) -> Result<String, JsValue> {
    feature_gap_json(separation, noise, offset, dim, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn run_verify(trials: usize, seed: u32, sabotage: bool) -> Result<String, JsValue> {
    verify_json(trials, u64::from(seed), sabotage).map_err(|e| JsValue::from_str(&e))
}
