//! Corpus files.
//!
//! - Tagged sequences (HMC family): one `token<TAB>label` per line, a blank line between
//!   sequences. The label column may be absent on unlabeled input.
//! - Documents (naive Bayes family): one `label<TAB>tok1 tok2 …` per line; an empty label
//!   marks an unlabeled document.
//! - Features: one JSON object per line, `{"label": "c", "vectors": [[…]]}` for documents or
//!   `{"labels": [...], "vectors": [[…], …]}` for sequences.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, LabelSet, ObsSet};
use crate::error::{Error, Result};
use crate::model::ModelKind;
use crate::sequence::{LabeledSequence, Observations};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Tagged,
    Documents,
    Features,
}

impl DataFormat {
    /// `.jsonl` files hold features; otherwise the model family decides.
    pub fn infer(path: &Path, kind: ModelKind) -> Self {
        if path.extension().is_some_and(|e| e == "jsonl") {
            DataFormat::Features
        } else if kind.is_sequential() {
            DataFormat::Tagged
        } else {
            DataFormat::Documents
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tokens {
    Symbols(Vec<String>),
    Features(Vec<Vec<f64>>),
}

impl Tokens {
    pub fn len(&self) -> usize {
        match self {
            Tokens::Symbols(s) => s.len(),
            Tokens::Features(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One sequence or document as read from disk, before alphabet encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    /// 1-based line where the record starts.
    pub line: usize,
    pub tokens: Tokens,
    /// One per token for tagged sequences, a single class for documents.
    pub labels: Option<Vec<String>>,
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

pub fn parse_tagged(text: &str, path: &str) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut start = 1;
    let mut flush = |tokens: &mut Vec<String>, labels: &mut Vec<Option<String>>, start: usize, end: usize| -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        let labelled = labels.iter().filter(|l| l.is_some()).count();
        let labels_out = if labelled == labels.len() {
            Some(labels.drain(..).map(Option::unwrap).collect())
        } else if labelled == 0 {
            labels.clear();
            None
        } else {
            return Err(parse_err(path, end, "sequence mixes labeled and unlabeled tokens"));
        };
        out.push(Record {
            line: start,
            tokens: Tokens::Symbols(std::mem::take(tokens)),
            labels: labels_out,
        });
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let n = i + 1;
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels, start, n)?;
            start = n + 1;
            continue;
        }
        let mut cols = line.split('\t');
        let token = cols.next().unwrap_or_default();
        let label = cols.next();
        if cols.next().is_some() {
            return Err(parse_err(path, n, "expected `token<TAB>label`, found more than two columns"));
        }
        if token.is_empty() {
            return Err(parse_err(path, n, "empty token"));
        }
        if let Some(l) = label {
            if l.contains(' ') {
                return Err(parse_err(
                    path,
                    n,
                    "label column contains spaces; this looks like document data (`label<TAB>tok1 tok2`), not tagged sequences",
                ));
            }
        }
        tokens.push(token.to_string());
        labels.push(label.filter(|l| !l.is_empty()).map(str::to_string));
    }
    flush(&mut tokens, &mut labels, start, text.lines().count())?;
    Ok(out)
}

pub fn parse_documents(text: &str, path: &str) -> Result<Vec<Record>> {
    let lines: Vec<&str> = text.lines().collect();
    let last = lines.iter().rposition(|l| !l.trim().is_empty()).map_or(0, |p| p + 1);
    let mut out = Vec::new();
    for (i, raw) in lines[..last].iter().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let n = i + 1;
        if line.trim().is_empty() {
            return Err(parse_err(
                path,
                n,
                "blank line inside document data; this looks like tagged sequences (`token<TAB>label`)",
            ));
        }
        let (label, body) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, n, "expected `label<TAB>tok1 tok2 …`"))?;
        let tokens: Vec<String> = body.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            return Err(parse_err(path, n, "document has no tokens"));
        }
        out.push(Record {
            line: n,
            tokens: Tokens::Symbols(tokens),
            labels: (!label.is_empty()).then(|| vec![label.to_string()]),
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct FeatureLine {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    vectors: Vec<Vec<f64>>,
}

pub fn parse_features(text: &str, path: &str) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let rec: FeatureLine =
            serde_json::from_str(line).map_err(|e| parse_err(path, n, e.to_string()))?;
        if rec.vectors.is_empty() {
            return Err(parse_err(path, n, "`vectors` is empty"));
        }
        let labels = match (rec.label, rec.labels) {
            (Some(_), Some(_)) => return Err(parse_err(path, n, "give `label` or `labels`, not both")),
            (Some(l), None) => Some(vec![l]),
            (None, l) => l,
        };
        out.push(Record {
            line: n,
            tokens: Tokens::Features(rec.vectors),
            labels,
        });
    }
    Ok(out)
}

pub fn parse(text: &str, path: &str, format: DataFormat) -> Result<Vec<Record>> {
    match format {
        DataFormat::Tagged => parse_tagged(text, path),
        DataFormat::Documents => parse_documents(text, path),
        DataFormat::Features => parse_features(text, path),
    }
}

pub fn read(path: &Path, format: DataFormat) -> Result<Vec<Record>> {
    parse(&fs::read_to_string(path)?, &path.display().to_string(), format)
}

/// Serializes records in `format`. Labels are written when present.
pub fn render(records: &[Record], format: DataFormat) -> Result<String> {
    let mut out = String::new();
    for (k, r) in records.iter().enumerate() {
        match (format, &r.tokens) {
            (DataFormat::Tagged, Tokens::Symbols(tokens)) => {
                if k > 0 {
                    out.push('\n');
                }
                for (t, tok) in tokens.iter().enumerate() {
                    match &r.labels {
                        Some(l) => writeln!(out, "{tok}\t{}", l[t]).expect("string write"),
                        None => writeln!(out, "{tok}").expect("string write"),
                    }
                }
            }
            (DataFormat::Documents, Tokens::Symbols(tokens)) => {
                let label = r.labels.as_ref().map_or("", |l| l[0].as_str());
                writeln!(out, "{label}\t{}", tokens.join(" ")).expect("string write");
            }
            (DataFormat::Features, Tokens::Features(vectors)) => {
                let (label, labels) = match &r.labels {
                    Some(l) if l.len() == 1 => (Some(l[0].clone()), None),
                    Some(l) => (None, Some(l.clone())),
                    None => (None, None),
                };
                let line = FeatureLine {
                    label,
                    labels,
                    vectors: vectors.clone(),
                };
                out.push_str(&serde_json::to_string(&line)?);
                out.push('\n');
            }
            _ => {
                return Err(Error::Shape(format!(
                    "record at line {} cannot be written in {format:?} format",
                    r.line
                )))
            }
        }
    }
    Ok(out)
}

/// Sorted label and symbol alphabets of labeled records.
pub fn alphabets(records: &[Record]) -> Result<(LabelSet, Option<ObsSet>)> {
    let mut labels = BTreeSet::new();
    let mut symbols = BTreeSet::new();
    let mut features = false;
    for r in records {
        let l = r
            .labels
            .as_ref()
            .ok_or_else(|| Error::Shape(format!("record at line {} has no labels", r.line)))?;
        labels.extend(l.iter().cloned());
        match &r.tokens {
            Tokens::Symbols(s) => symbols.extend(s.iter().cloned()),
            Tokens::Features(_) => features = true,
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyData);
    }
    let obs = if features && symbols.is_empty() {
        None
    } else {
        Some(Alphabet::new(symbols)?)
    };
    Ok((Alphabet::new(labels)?, obs))
}

/// Maps records onto alphabet indices. Labels are encoded when `require_labels` is set or
/// when present; unlabeled records get an empty label list.
pub fn encode(
    records: &[Record],
    kind: ModelKind,
    labels: &LabelSet,
    observations: Option<&ObsSet>,
    require_labels: bool,
) -> Result<Vec<LabeledSequence>> {
    records
        .iter()
        .map(|r| {
            let obs = match &r.tokens {
                Tokens::Symbols(s) => {
                    let alphabet = observations.ok_or_else(|| {
                        Error::Shape("the model reads feature vectors, but the data has tokens".into())
                    })?;
                    Observations::Symbols(
                        s.iter()
                            .enumerate()
                            .map(|(t, tok)| {
                                alphabet.index(tok).ok_or_else(|| {
                                    Error::Alphabet(format!(
                                        "unknown token `{tok}` (record at line {}, position {})",
                                        r.line,
                                        t + 1
                                    ))
                                })
                            })
                            .collect::<Result<_>>()?,
                    )
                }
                Tokens::Features(f) => Observations::Features(f.clone()),
            };
            let x = match &r.labels {
                Some(l) => {
                    let expected = if kind.is_sequential() { r.tokens.len() } else { 1 };
                    if l.len() != expected {
                        return Err(Error::Shape(format!(
                            "record at line {}: {} labels for {} tokens under a {kind} model{}",
                            r.line,
                            l.len(),
                            r.tokens.len(),
                            if kind.is_sequential() {
                                ""
                            } else {
                                " (document data has one class label)"
                            }
                        )));
                    }
                    l.iter()
                        .map(|name| {
                            labels.index(name).ok_or_else(|| {
                                Error::Alphabet(format!("unknown label `{name}` (record at line {})", r.line))
                            })
                        })
                        .collect::<Result<_>>()?
                }
                None if require_labels => {
                    return Err(Error::Shape(format!("record at line {} has no labels", r.line)))
                }
                None => Vec::new(),
            };
            Ok(LabeledSequence { labels: x, observations: obs })
        })
        .collect()
}

/// Records for sequences drawn in index space, named through the alphabets.
pub fn decode_sequences(seqs: &[LabeledSequence], labels: &LabelSet, observations: Option<&ObsSet>) -> Vec<Record> {
    seqs.iter()
        .enumerate()
        .map(|(k, s)| Record {
            line: k + 1,
            tokens: match &s.observations {
                Observations::Symbols(y) => Tokens::Symbols(
                    y.iter()
                        .map(|&i| observations.expect("symbol alphabet").name(i).to_string())
                        .collect(),
                ),
                Observations::Features(f) => Tokens::Features(f.clone()),
            },
            labels: Some(s.labels.iter().map(|&i| labels.name(i).to_string()).collect()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_roundtrip() {
        let text = "the\tD\ndog\tN\n\nruns\tV\n";
        let recs = parse_tagged(text, "t").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].line, 4);
        assert_eq!(render(&recs, DataFormat::Tagged).unwrap(), text);
    }

    #[test]
    fn unlabeled_tagged_input() {
        let recs = parse_tagged("the\ndog\n", "t").unwrap();
        assert_eq!(recs[0].labels, None);
        assert!(parse_tagged("the\tD\ndog\n", "t").is_err());
    }

    #[test]
    fn documents_roundtrip() {
        let text = "a\tu v\nb\tv\n";
        let recs = parse_documents(text, "d").unwrap();
        assert_eq!(recs[0].tokens, Tokens::Symbols(vec!["u".into(), "v".into()]));
        assert_eq!(render(&recs, DataFormat::Documents).unwrap(), text);
    }

    #[test]
    fn format_mismatches_are_explicit() {
        let err = parse_tagged("a\tu v\n", "x").unwrap_err().to_string();
        assert!(err.contains("document data"), "{err}");
        let err = parse_documents("dog\tN\n\ncat\tN\n", "x").unwrap_err().to_string();
        assert!(err.contains("tagged sequences"), "{err}");
    }

    #[test]
    fn features_roundtrip() {
        let text = "{\"label\":\"c1\",\"vectors\":[[0.5,-1.0]]}\n{\"labels\":[\"s0\",\"s1\"],\"vectors\":[[1.0],[2.0]]}\n";
        let recs = parse_features(text, "f").unwrap();
        assert_eq!(recs[0].labels, Some(vec!["c1".into()]));
        assert_eq!(render(&recs, DataFormat::Features).unwrap(), text);
    }

    #[test]
    fn sorted_alphabets_and_encoding() {
        let recs = parse_documents("b\tv u\na\tu\n", "d").unwrap();
        let (l, o) = alphabets(&recs).unwrap();
        assert_eq!(l.names(), &["a".to_string(), "b".to_string()]);
        let seqs = encode(&recs, ModelKind::NaiveBayes, &l, o.as_ref(), true).unwrap();
        assert_eq!(seqs[0].labels, vec![1]);
        assert_eq!(seqs[0].observations.symbols().unwrap(), &[1, 0]);
        assert!(encode(&recs, ModelKind::Hmc, &l, o.as_ref(), true).is_err());
    }

    #[test]
    fn unknown_token_names_position() {
        let recs = parse_documents("a\tu w\n", "d").unwrap();
        let l = Alphabet::new(["a"]).unwrap();
        let o = Alphabet::new(["u"]).unwrap();
        let err = encode(&recs, ModelKind::NaiveBayes, &l, Some(&o), true).unwrap_err().to_string();
        assert!(err.contains("`w`") && err.contains("position 2"), "{err}");
    }
}
