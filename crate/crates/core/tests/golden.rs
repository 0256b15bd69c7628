//! Sampled corpora pinned byte-for-byte. Regenerate with `GENDISC_BLESS=1`.

use std::fs;
use std::path::PathBuf;

use gendisc::data::{decode_sequences, render, DataFormat};
use gendisc::model::{GenerativeModel, GenerativeTables, ModelFile};
use gendisc::synth::{derive_seed, sample_corpus, Rng};
use gendisc::Alphabet;

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn check(name: &str, actual: &str) {
    if std::env::var_os("GENDISC_BLESS").is_some() {
        fs::write(path(name), actual).unwrap();
    }
    let expected = fs::read_to_string(path(name)).unwrap();
    assert!(expected == actual, "{name} differs from the pinned corpus");
}

fn model_from_file(name: &str) -> GenerativeModel {
    match ModelFile::load(path(name)).unwrap() {
        ModelFile::Generative(m) => m,
        ModelFile::Discriminative(_) => panic!("expected a generative model"),
    }
}

#[test]
fn hmc_corpus() {
    let model = model_from_file("weather.json");
    let seqs = sample_corpus(&model, 20, 12, 7).unwrap();
    let text = render(&decode_sequences(&seqs, &model.labels, Some(&model.observations)), DataFormat::Tagged).unwrap();
    check("weather_seed7.tsv", &text);
}

#[test]
fn nb_corpus() {
    let model = GenerativeModel::new(
        Alphabet::new(["a", "b"]).unwrap(),
        Alphabet::new(["u", "v"]).unwrap(),
        GenerativeTables::NaiveBayes {
            prior: vec![0.6, 0.4],
            emission: vec![vec![0.7, 0.3], vec![0.2, 0.8]],
        },
    );
    let seqs = sample_corpus(&model, 30, 4, 11).unwrap();
    let text = render(&decode_sequences(&seqs, &model.labels, Some(&model.observations)), DataFormat::Documents).unwrap();
    check("nb_seed11.tsv", &text);
}

#[test]
fn uniform_stream() {
    let mut rng = Rng::new(derive_seed(2024, 0));
    let text: String = (0..16).map(|_| format!("{:016x}\n", rng.next_u64())).collect();
    check("chacha8_stream.txt", &text);
}
