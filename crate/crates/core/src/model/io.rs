//! JSON model files.
//!
//! ```json
//! {"schema_version": 1, "model_type": "generative", "kind": "hmc",
//!  "labels": [...], "observations": [...], "tables": {...}}
//! {"schema_version": 1, "model_type": "discriminative", "kind": "hmc",
//!  "labels": [...], "observations": [...] | null, "units": {...}}
//! ```
//!
//! Tables are nested arrays in row-major order; feature heads are `{"d", "W", "b"}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{validate_generative, validate_units, DiscriminativeUnits, GenerativeModel, GenerativeTables, ModelKind, UnitSet};
use crate::alphabet::{LabelSet, ObsSet};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GenerativeDoc {
    schema_version: u32,
    model_type: String,
    labels: LabelSet,
    observations: ObsSet,
    #[serde(flatten)]
    tables: GenerativeTables,
}

#[derive(Serialize, Deserialize)]
struct DiscriminativeDoc {
    schema_version: u32,
    model_type: String,
    labels: LabelSet,
    observations: Option<ObsSet>,
    #[serde(flatten)]
    units: UnitSet,
}

/// Either parameterization, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Generative(GenerativeModel),
    Discriminative(DiscriminativeUnits),
}

impl ModelFile {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelFile::Generative(m) => m.kind(),
            ModelFile::Discriminative(u) => u.kind(),
        }
    }

    /// Parses and validates a model document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let version = value
            .get("schema_version")
            .ok_or_else(|| Error::Shape("missing mandatory field `schema_version`".into()))?
            .as_u64();
        if version != Some(SCHEMA_VERSION as u64) {
            return Err(Error::Unsupported(format!(
                "schema_version {:?} (this build reads {SCHEMA_VERSION})",
                value["schema_version"]
            )));
        }
        let model = match value.get("model_type").and_then(Value::as_str) {
            Some("generative") => {
                let doc: GenerativeDoc = serde_json::from_value(value)?;
                ModelFile::Generative(GenerativeModel::new(doc.labels, doc.observations, doc.tables))
            }
            Some("discriminative") => {
                let doc: DiscriminativeDoc = serde_json::from_value(value)?;
                ModelFile::Discriminative(DiscriminativeUnits {
                    labels: doc.labels,
                    observations: doc.observations,
                    units: doc.units,
                })
            }
            other => {
                return Err(Error::Shape(format!(
                    "`model_type` must be \"generative\" or \"discriminative\", got {other:?}"
                )))
            }
        };
        let violations = match &model {
            ModelFile::Generative(m) => validate_generative(m),
            ModelFile::Discriminative(u) => validate_units(u),
        };
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let text = match self {
            ModelFile::Generative(m) => serde_json::to_string_pretty(&GenerativeDoc {
                schema_version: SCHEMA_VERSION,
                model_type: "generative".into(),
                labels: m.labels.clone(),
                observations: m.observations.clone(),
                tables: m.tables.clone(),
            })?,
            ModelFile::Discriminative(u) => serde_json::to_string_pretty(&DiscriminativeDoc {
                schema_version: SCHEMA_VERSION,
                model_type: "discriminative".into(),
                labels: u.labels.clone(),
                observations: u.observations.clone(),
                units: u.units.clone(),
            })?,
        };
        Ok(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json_string()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

impl From<GenerativeModel> for ModelFile {
    fn from(m: GenerativeModel) -> Self {
        ModelFile::Generative(m)
    }
}

impl From<DiscriminativeUnits> for ModelFile {
    fn from(u: DiscriminativeUnits) -> Self {
        ModelFile::Discriminative(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::model::{bayes_invert, FeatureHead, Unit};

    fn hmc() -> GenerativeModel {
        GenerativeModel::new(
            Alphabet::new(["N", "V"]).unwrap(),
            Alphabet::new(["dog", "runs", "the"]).unwrap(),
            GenerativeTables::Hmc {
                initial: vec![0.5, 0.5],
                transition: vec![vec![0.3, 0.7], vec![0.6, 0.4]],
                emission: vec![vec![0.5, 0.1, 0.4], vec![0.2, 0.7, 0.1]],
            },
        )
    }

    #[test]
    fn generative_document_layout() {
        let text = ModelFile::from(hmc()).to_json_string().unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["model_type"], "generative");
        assert_eq!(v["kind"], "hmc");
        assert_eq!(v["labels"][1], "V");
        assert_eq!(v["tables"]["transition"][0][1], 0.7);
        assert_eq!(ModelFile::from_json_str(&text).unwrap(), ModelFile::from(hmc()));
    }

    #[test]
    fn discriminative_document_roundtrip() {
        let units = bayes_invert(&hmc(), 4).unwrap();
        let file = ModelFile::from(units);
        let text = file.to_json_string().unwrap();
        assert_eq!(ModelFile::from_json_str(&text).unwrap(), file);
    }

    #[test]
    fn feature_head_layout() {
        let mut units = bayes_invert(&hmc(), 2).unwrap();
        units.observations = None;
        for u in units.units.posterior_units_mut() {
            *u = Unit::Head(FeatureHead::zeros(2, 3));
        }
        let text = ModelFile::from(units.clone()).to_json_string().unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["units"]["posterior"]["head"]["d"], 3);
        assert!(v["units"]["posterior"]["head"]["W"].is_array());
        assert!(v["observations"].is_null());
        assert_eq!(ModelFile::from_json_str(&text).unwrap(), ModelFile::from(units));
    }

    #[test]
    fn schema_version_is_mandatory() {
        let mut v: Value =
            serde_json::from_str(&ModelFile::from(hmc()).to_json_string().unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("schema_version");
        assert!(ModelFile::from_json_str(&v.to_string()).is_err());
    }

    #[test]
    fn invalid_tables_are_rejected_with_violations() {
        let mut m = hmc();
        if let GenerativeTables::Hmc { transition, .. } = &mut m.tables {
            transition[0] = vec![0.5, 0.6];
        }
        let text = ModelFile::from(m).to_json_string().unwrap();
        match ModelFile::from_json_str(&text) {
            Err(Error::Invalid(v)) => assert_eq!(v[0].table, "transition"),
            other => panic!("expected violations, got {other:?}"),
        }
    }
}
