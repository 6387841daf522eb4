//! Finite Kripke models over an atomic alphabet, with program relations
//! completed by the standard-model identities.

mod frame;
mod io;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::bitset::{Relation, StateSet};
use crate::syntax::{Formula, Program};

pub use frame::FrameCondition;
pub use io::{ModelFile, ModelFormatError};

pub type Valuation = BTreeMap<u32, StateSet>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("unknown modality `{0}`")]
    UnknownModality(String),
    #[error("modality `{0}` already exists")]
    NameClash(String),
    #[error("relation for `{name}` has {got} states, model has {expected}")]
    SizeMismatch {
        name: String,
        got: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    states: Vec<String>,
    relations: BTreeMap<String, Relation>,
    valuation: Valuation,
}

impl Model {
    /// Model with the given state names, every listed modality empty and an empty valuation.
    pub fn new<S: Into<String>, M: Into<String>>(
        states: impl IntoIterator<Item = S>,
        alphabet: impl IntoIterator<Item = M>,
    ) -> Self {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        let n = states.len();
        Model {
            relations: alphabet
                .into_iter()
                .map(|m| (m.into(), Relation::empty(n)))
                .collect(),
            states,
            valuation: Valuation::new(),
        }
    }

    /// Model with states named `s0 .. s{n-1}`.
    pub fn with_size<M: Into<String>>(n: usize, alphabet: impl IntoIterator<Item = M>) -> Self {
        Self::new((0..n).map(|i| format!("s{i}")), alphabet)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, x: usize) -> &str {
        &self.states[x]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn rename_states(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.states.len());
        self.states = names;
    }

    pub fn alphabet(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn has_modality(&self, m: &str) -> bool {
        self.relations.contains_key(m)
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn relation(&self, m: &str) -> Result<&Relation, KripkeError> {
        self.relations
            .get(m)
            .ok_or_else(|| KripkeError::UnknownModality(m.to_string()))
    }

    pub fn set_relation(&mut self, m: impl Into<String>, r: Relation) -> Result<(), KripkeError> {
        let m = m.into();
        if r.size() != self.len() {
            return Err(KripkeError::SizeMismatch {
                name: m,
                got: r.size(),
                expected: self.len(),
            });
        }
        self.relations.insert(m, r);
        Ok(())
    }

    pub fn add_edge(&mut self, m: &str, x: usize, y: usize) -> Result<(), KripkeError> {
        self.relations
            .get_mut(m)
            .ok_or_else(|| KripkeError::UnknownModality(m.to_string()))?
            .insert(x, y);
        Ok(())
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn set_valuation(&mut self, valuation: Valuation) {
        debug_assert!(valuation.values().all(|s| s.universe() == self.len()));
        self.valuation = valuation;
    }

    pub fn set_var(&mut self, var: u32, set: StateSet) {
        assert_eq!(set.universe(), self.len());
        self.valuation.insert(var, set);
    }

    /// `θ(p)`, empty when `p` is unvalued.
    pub fn var(&self, var: u32) -> StateSet {
        self.valuation
            .get(&var)
            .cloned()
            .unwrap_or_else(|| StateSet::empty(self.len()))
    }

    pub fn universe(&self) -> StateSet {
        StateSet::full(self.len())
    }

    /// Copy restricted to the given modalities (the valuation is kept).
    pub fn reduct<'a>(&self, modalities: impl IntoIterator<Item = &'a str>) -> Result<Model, KripkeError> {
        let mut relations = BTreeMap::new();
        for m in modalities {
            relations.insert(m.to_string(), self.relation(m)?.clone());
        }
        Ok(Model {
            states: self.states.clone(),
            relations,
            valuation: self.valuation.clone(),
        })
    }

    pub fn names_of(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|x| self.states[x].clone()).collect()
    }
}

/// Relation of a compound program, built bottom-up from the atomic relations.
pub fn program_relation(m: &Model, e: &Program) -> Result<Relation, KripkeError> {
    Ok(match e {
        Program::Atom(a) => m.relation(a)?.clone(),
        Program::Union(a, b) => program_relation(m, a)?.union(&program_relation(m, b)?),
        Program::Comp(a, b) => program_relation(m, a)?.compose(&program_relation(m, b)?),
        Program::TransClos(a) => program_relation(m, a)?.transitive_closure(),
        Program::Converse(a) => program_relation(m, a)?.converse(),
    })
}

/// Evaluates formulas on one model under varying valuations, computing each
/// compound program relation once.
pub struct FrameEval<'a> {
    model: &'a Model,
    programs: HashMap<Program, Relation>,
}

impl<'a> FrameEval<'a> {
    pub fn new(model: &'a Model) -> Self {
        FrameEval {
            model,
            programs: HashMap::new(),
        }
    }

    pub fn eval(&mut self, valuation: &Valuation, phi: &Formula) -> Result<StateSet, KripkeError> {
        let n = self.model.len();
        Ok(match phi {
            Formula::Bot => StateSet::empty(n),
            Formula::Var(i) => valuation.get(i).cloned().unwrap_or_else(|| StateSet::empty(n)),
            Formula::Imp(a, b) => {
                let a = self.eval(valuation, a)?;
                let b = self.eval(valuation, b)?;
                a.implies(&b)
            }
            Formula::Diamond(e, a) => {
                let target = self.eval(valuation, a)?;
                if let Program::Atom(name) = e {
                    return Ok(self.model.relation(name)?.preimage(&target));
                }
                if !self.programs.contains_key(e) {
                    let r = program_relation(self.model, e)?;
                    self.programs.insert(e.clone(), r);
                }
                self.programs[e].preimage(&target)
            }
        })
    }
}

/// Truth set of `phi` under an explicit valuation.
pub fn eval_with(m: &Model, valuation: &Valuation, phi: &Formula) -> Result<StateSet, KripkeError> {
    FrameEval::new(m).eval(valuation, phi)
}

/// `{x | M, x ⊨ φ}`; unvalued variables are false everywhere.
pub fn eval(m: &Model, phi: &Formula) -> Result<StateSet, KripkeError> {
    eval_with(m, &m.valuation, phi)
}

/// `M ⊨ φ`: true at every state.
pub fn models(m: &Model, phi: &Formula) -> Result<bool, KripkeError> {
    Ok(eval(m, phi)?.is_full())
}

pub fn frame_condition_holds(
    m: &Model,
    modality: &str,
    cond: FrameCondition,
) -> Result<bool, KripkeError> {
    Ok(cond.holds(m.relation(modality)?))
}

fn enrich(m: &Model, e: &str, new_name: &str, f: impl Fn(&Relation) -> Relation) -> Result<Model, KripkeError> {
    if m.has_modality(new_name) {
        return Err(KripkeError::NameClash(new_name.to_string()));
    }
    let r = f(m.relation(e)?);
    let mut out = m.clone();
    out.relations.insert(new_name.to_string(), r);
    Ok(out)
}

/// Adds `(R_e)^+` under `new_name`.
pub fn trans_enrich(m: &Model, e: &str, new_name: &str) -> Result<Model, KripkeError> {
    enrich(m, e, new_name, Relation::transitive_closure)
}

/// Adds `(R_e)^-1` under `new_name`.
pub fn temp_enrich(m: &Model, e: &str, new_name: &str) -> Result<Model, KripkeError> {
    enrich(m, e, new_name, Relation::converse)
}
