//! Filtrations for fusions of logics that each admit filtration.
//!
//! Every `◇φ ∈ Γ` gets a fresh variable `q_φ` true exactly where `φ` is.
//! Each component filters its reduct through the variables of Γ and its own
//! `◇q_φ`. The component partitions are intersected, both filtrations are
//! refined onto the intersection, and the relations are merged.

mod logic;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{model_validates, AlgebraError};
use crate::filtration::{
    check_filtration, filter_with, refine, FilterOptions, FiltrationCertificate, FiltrationError,
    Partition, Strategy, Witness,
};
use crate::kripke::{eval, KripkeError, Model};
use crate::syntax::{shift_alphabet, Formula, FormulaSet, SyntaxError};

pub use logic::{LogicError, LogicSpec, BUILTIN_NAMES};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("no component logics given")]
    NoComponents,
    #[error("modality `{0}` belongs to more than one component")]
    OverlappingAlphabets(String),
    #[error("modality `{0}` of the model belongs to no component")]
    Uncovered(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("the model does not validate the fusion (axiom `{0}`)")]
    Precondition(String),
    #[error("component {logic}: {source}")]
    Component {
        logic: String,
        #[source]
        source: FiltrationError,
    },
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error("fused quotient failed its check: {0}")]
    Check(String),
}

/// What each stage of a fusion filtration produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FusionTrace {
    /// `(φ, q_φ)` for every `◇φ ∈ Γ`.
    pub fresh: Vec<(String, String)>,
    pub components: Vec<ComponentTrace>,
    /// Blocks of the intersected equivalence.
    pub joint_blocks: usize,
    pub delta: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentTrace {
    pub logic: String,
    pub alphabet: Vec<String>,
    pub gamma: Vec<String>,
    pub strategy: String,
    pub detail: Option<String>,
    pub blocks: usize,
    /// Whether the refinement onto the joint partition re-verified.
    pub refined: bool,
}

/// Combines single-logic specs into one spec over the union alphabet.
///
/// Overlapping alphabets are made disjoint by suffixing each modality with
/// the 1-based component index.
pub fn fuse_logics(specs: Vec<LogicSpec>) -> Result<LogicSpec, FusionError> {
    if specs.is_empty() {
        return Err(FusionError::NoComponents);
    }
    if specs.len() == 1 {
        return Ok(specs.into_iter().next().expect("one spec"));
    }
    let mut seen = BTreeSet::new();
    let overlap = specs
        .iter()
        .flat_map(|s| s.alphabet.iter())
        .any(|a| !seen.insert(a.clone()));
    let specs = if overlap {
        specs
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let renaming = s.alphabet.iter().map(|a| (a.clone(), format!("{a}{}", i + 1))).collect();
                rename_spec(&s, &renaming)
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        specs
    };
    let mut axioms = FormulaSet::new();
    let mut conditions = Some(Vec::new());
    for s in &specs {
        axioms.extend(s.axioms.iter().cloned());
        match (&mut conditions, &s.frame_conditions) {
            (Some(all), Some(own)) => all.extend(own.iter().cloned()),
            _ => conditions = None,
        }
    }
    Ok(LogicSpec {
        name: specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join("*"),
        alphabet: specs.iter().flat_map(|s| s.alphabet.iter().cloned()).collect(),
        axioms,
        frame_conditions: conditions,
        builtin: specs.iter().all(|s| s.builtin),
        strategy: Strategy::Fusion(specs),
    })
}

fn rename_spec(spec: &LogicSpec, renaming: &BTreeMap<String, String>) -> Result<LogicSpec, FusionError> {
    let axioms = spec
        .axioms
        .iter()
        .map(|f| shift_alphabet(f, renaming))
        .collect::<Result<FormulaSet, _>>()?;
    let strategy = match &spec.strategy {
        Strategy::Fusion(parts) => Strategy::Fusion(
            parts.iter().map(|p| rename_spec(p, renaming)).collect::<Result<_, _>>()?,
        ),
        other => other.clone(),
    };
    let rename = |a: &String| renaming.get(a).cloned().unwrap_or_else(|| a.clone());
    Ok(LogicSpec {
        name: spec.name.clone(),
        alphabet: spec.alphabet.iter().map(rename).collect(),
        axioms,
        frame_conditions: spec
            .frame_conditions
            .as_ref()
            .map(|cs| cs.iter().map(|(a, c)| (rename(a), *c)).collect()),
        strategy,
        builtin: spec.builtin,
    })
}

/// Filters `m` through Γ for the fusion of `specs`.
pub fn fuse_filter(
    m: &Model,
    gamma: &FormulaSet,
    specs: &[LogicSpec],
    opts: &FilterOptions,
) -> Result<(FiltrationCertificate, FusionTrace), FusionError> {
    if specs.is_empty() {
        return Err(FusionError::NoComponents);
    }
    crate::filtration::check_gamma(gamma)?;
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, s) in specs.iter().enumerate() {
        for a in &s.alphabet {
            if owner.insert(a, i).is_some() {
                return Err(FusionError::OverlappingAlphabets(a.clone()));
            }
            m.relation(a)?;
        }
    }
    if let Some(a) = m.alphabet().find(|a| !owner.contains_key(a)) {
        return Err(FusionError::Uncovered(a.to_string()));
    }

    let mut all_axioms = FormulaSet::new();
    for s in specs {
        all_axioms.extend(s.axioms.iter().cloned());
    }
    let v = model_validates(m, &all_axioms, opts.limits)?;
    if let Some(c) = v.counter {
        return Err(FusionError::Precondition(c.axiom.to_string()));
    }

    // fresh variables, in a canonical order of their formulas
    let vars = gamma.vars();
    let base = gamma.max_var().map_or(0, |v| v + 1);
    let mut bodies: Vec<&Formula> = gamma.diamonds().into_iter().map(|(_, phi)| phi).collect();
    bodies.sort_by_key(|f| (f.size(), f.to_string()));
    bodies.dedup();
    let q: BTreeMap<&Formula, u32> = bodies.iter().enumerate().map(|(i, f)| (*f, base + i as u32)).collect();

    let mut m_v = m.clone();
    let mut valuation = BTreeMap::new();
    for &v in &vars {
        valuation.insert(v, m.var(v));
    }
    for (phi, &qv) in &q {
        valuation.insert(qv, eval(m, phi)?);
    }
    m_v.set_valuation(valuation);

    let mut certs = Vec::new();
    let mut traces = Vec::new();
    for s in specs {
        let reduct = m_v.reduct(s.alphabet.iter().map(String::as_str))?;
        let mut g: FormulaSet = vars.iter().map(|&v| Formula::var(v)).collect();
        for (a, phi) in gamma.diamonds() {
            if s.alphabet.iter().any(|x| x == a) {
                g.insert(Formula::dia(a, Formula::var(q[phi])));
            }
        }
        let g = g.closure();
        let cert = filter_with(&reduct, &g, &s.strategy, s, opts).map_err(|source| FusionError::Component {
            logic: s.to_string(),
            source,
        })?;
        traces.push(ComponentTrace {
            logic: s.to_string(),
            alphabet: s.alphabet.clone(),
            gamma: g.iter().map(ToString::to_string).collect(),
            strategy: cert.strategy.clone(),
            detail: cert.detail.clone(),
            blocks: cert.partition.len(),
            refined: false,
        });
        certs.push(cert);
    }

    let joint: Partition = certs
        .iter()
        .skip(1)
        .fold(certs[0].partition.clone(), |acc, c| acc.intersect(&c.partition));

    let mut relations = BTreeMap::new();
    for (cert, trace) in certs.iter().zip(&mut traces) {
        let refined = refine(cert, &joint).map_err(|source| FusionError::Component {
            logic: trace.logic.clone(),
            source,
        })?;
        let report = refined.report.as_ref().expect("refine checks its result");
        trace.refined = report.conditions_hold() && report.lemma.is_none();
        if !trace.refined {
            return Err(FusionError::Check(format!("refinement of {} failed: {report:?}", trace.logic)));
        }
        relations.extend(refined.quotient.relations().clone());
    }

    let sigma: BTreeMap<u32, Formula> = q.iter().map(|(phi, &v)| (v, (*phi).clone())).collect();
    let mut witness = joint.witness().cloned().unwrap_or_default().substitute(&sigma);
    witness = witness.union(&Witness::formulas(gamma.clone()));
    let partition = joint.clone().with_witness(witness.clone());

    let label = Strategy::Fusion(specs.to_vec()).to_string();
    let mut cert = FiltrationCertificate::from_relations(m, gamma, partition, relations, label);
    cert.detail = Some(
        traces
            .iter()
            .map(|t| format!("{}: {}", t.logic, t.strategy))
            .collect::<Vec<_>>()
            .join("; "),
    );
    let report = check_filtration(&cert)?;
    if !report.passed() {
        return Err(FusionError::Check(format!("{report:?}")));
    }
    cert.report = Some(report);
    let validation = model_validates(&cert.quotient, &all_axioms, opts.limits)?;
    let holds = validation.holds;
    cert.logic_check = Some(validation);
    if !holds {
        return Err(FusionError::Check("the fused quotient refutes an axiom".into()));
    }

    let trace = FusionTrace {
        fresh: bodies.iter().map(|phi| (phi.to_string(), format!("p{}", q[phi]))).collect(),
        components: traces,
        joint_blocks: joint.len(),
        delta: witness.describe(),
        passed: true,
    };
    Ok((cert, trace))
}
