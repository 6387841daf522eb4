use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FiltrationCertificate, FiltrationError, FiltrationReport};
use crate::kripke::Model;
use crate::syntax::FormulaSet;

/// Sidecar written next to a quotient model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSidecar {
    /// The definability witness, one entry per formula or characteristic set.
    pub delta: Option<Vec<String>>,
    /// Source state name to quotient state name.
    pub map: BTreeMap<String, String>,
    pub strategy: String,
    pub verified: bool,
}

impl CertificateSidecar {
    pub fn from_certificate(cert: &FiltrationCertificate) -> Self {
        let map = (0..cert.source.len())
            .map(|x| {
                let b = cert.partition.class_of(x);
                (cert.source.state_name(x).to_string(), cert.quotient.state_name(b).to_string())
            })
            .collect();
        CertificateSidecar {
            delta: cert.delta().map(|w| w.describe()),
            map,
            strategy: cert.strategy.clone(),
            verified: cert.report.as_ref().is_some_and(FiltrationReport::passed),
        }
    }
}

/// Resolves a name-to-name state map into a certificate.
pub fn certificate_from_map(
    source: &Model,
    gamma: &FormulaSet,
    quotient: Model,
    map: &BTreeMap<String, String>,
) -> Result<FiltrationCertificate, FiltrationError> {
    let mut indices = Vec::with_capacity(source.len());
    for x in 0..source.len() {
        let name = source.state_name(x);
        let target = map
            .get(name)
            .ok_or_else(|| FiltrationError::Structural(format!("map has no entry for state `{name}`")))?;
        let b = quotient
            .state_index(target)
            .ok_or_else(|| FiltrationError::Structural(format!("map sends `{name}` to unknown state `{target}`")))?;
        indices.push(b);
    }
    if let Some(extra) = map.keys().find(|k| source.state_index(k).is_none()) {
        return Err(FiltrationError::Structural(format!("map mentions unknown source state `{extra}`")));
    }
    FiltrationCertificate::from_parts(source, gamma, indices, quotient)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportJson {
    pub passed: bool,
    pub conditions_hold: bool,
    pub refines_gamma: Option<SplitBlock>,
    pub valuation: Option<ValuationMismatch>,
    pub lower_bound: Option<MissingPair>,
    pub upper_bound: Option<ExcessPair>,
    pub lemma: Option<LemmaFailure>,
    pub definable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitBlock {
    pub x: String,
    pub y: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValuationMismatch {
    pub state: String,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MissingPair {
    pub modality: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcessPair {
    pub modality: String,
    pub from: String,
    pub to: String,
    pub psi: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaFailure {
    pub state: String,
    pub formula: String,
}

impl ReportJson {
    /// Names states from the certificate's source and quotient.
    pub fn new(report: &FiltrationReport, cert: &FiltrationCertificate) -> Self {
        let src = |x: usize| cert.source.state_name(x).to_string();
        let dst = |b: usize| cert.quotient.state_name(b).to_string();
        ReportJson {
            passed: report.passed(),
            conditions_hold: report.conditions_hold(),
            refines_gamma: report.refines_gamma.as_ref().map(|(x, y, f)| SplitBlock {
                x: src(*x),
                y: src(*y),
                formula: f.to_string(),
            }),
            valuation: report.valuation.map(|(x, v)| ValuationMismatch {
                state: src(x),
                var: format!("p{v}"),
            }),
            lower_bound: report.lower_bound.as_ref().map(|(m, bx, by)| MissingPair {
                modality: m.clone(),
                from: dst(*bx),
                to: dst(*by),
            }),
            upper_bound: report.upper_bound.as_ref().map(|(m, bx, by, psi)| ExcessPair {
                modality: m.clone(),
                from: dst(*bx),
                to: dst(*by),
                psi: psi.to_string(),
            }),
            lemma: report.lemma.as_ref().map(|(x, f)| LemmaFailure {
                state: src(*x),
                formula: f.to_string(),
            }),
            definable: report.definable,
        }
    }
}
