//! JSON model files: `{"states": [...], "relations": {...}, "valuation": {...}}`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Model;
use crate::bitset::{Relation, StateSet};

#[derive(Debug, Error)]
pub enum ModelFormatError {
    #[error("invalid model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{name}` in {context}")]
    UnknownState { name: String, context: String },
    #[error("valuation key `{0}` is not a variable (expected p0, p1, ...)")]
    BadVariable(String),
    #[error("invalid modality name `{0}`")]
    BadModality(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub relations: BTreeMap<String, Vec<[String; 2]>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

pub(crate) fn parse_var_name(key: &str) -> Option<u32> {
    let digits = key.strip_prefix('p')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn valid_modality(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && parse_var_name(name).is_none()
        && name != "true"
        && name != "false"
}

impl ModelFile {
    pub fn into_model(self) -> Result<Model, ModelFormatError> {
        let mut index = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(ModelFormatError::DuplicateState(s.clone()));
            }
        }
        let n = self.states.len();
        let lookup = |name: &String, context: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelFormatError::UnknownState {
                    name: name.clone(),
                    context: context.to_string(),
                })
        };
        let mut model = Model::new(self.states.clone(), Vec::<String>::new());
        for (m, pairs) in &self.relations {
            if !valid_modality(m) {
                return Err(ModelFormatError::BadModality(m.clone()));
            }
            let mut r = Relation::empty(n);
            for [from, to] in pairs {
                let ctx = format!("relation `{m}`");
                r.insert(lookup(from, &ctx)?, lookup(to, &ctx)?);
            }
            model
                .set_relation(m.clone(), r)
                .expect("relation sized to the model");
        }
        for (key, names) in &self.valuation {
            let var = parse_var_name(key).ok_or_else(|| ModelFormatError::BadVariable(key.clone()))?;
            let mut set = StateSet::empty(n);
            for name in names {
                set.insert(lookup(name, &format!("valuation of `{key}`"))?);
            }
            model.set_var(var, set);
        }
        Ok(model)
    }

    pub fn from_model(model: &Model) -> Self {
        let names = model.state_names();
        ModelFile {
            states: names.to_vec(),
            relations: model
                .relations()
                .iter()
                .map(|(m, r)| {
                    (
                        m.clone(),
                        r.pairs()
                            .map(|(x, y)| [names[x].clone(), names[y].clone()])
                            .collect(),
                    )
                })
                .collect(),
            valuation: model
                .valuation()
                .iter()
                .map(|(v, set)| (format!("p{v}"), model.names_of(set)))
                .collect(),
        }
    }
}

impl Model {
    pub fn from_json(text: &str) -> Result<Model, ModelFormatError> {
        serde_json::from_str::<ModelFile>(text)?.into_model()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ModelFile::from_model(self)).expect("model file serializes")
    }
}
