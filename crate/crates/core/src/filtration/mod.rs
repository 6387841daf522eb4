//! Γ-filtrations of finite models.
//!
//! A certificate bundles a source model, a Sub-closed Γ, a partition of the
//! source states (optionally with a definability witness Δ), and the quotient
//! model on the blocks. [`check_filtration`] re-verifies the three filtration
//! conditions and the truth-preservation lemma from scratch.

mod bisim;
mod io;
mod partition;
mod refine;
mod strategy;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{AlgebraError, CounterAssignment, Validation};
use crate::bitset::{Relation, StateSet};
use crate::fusion::FusionError;
use crate::kripke::{eval, KripkeError, Model};
use crate::syntax::{Formula, FormulaSet};

pub use bisim::{bisim_coarsest, characteristic_formulas};
pub use io::{
    certificate_from_map, CertificateSidecar, ExcessPair, LemmaFailure, MissingPair, ReportJson,
    SplitBlock, ValuationMismatch,
};
pub use partition::{bounded_bisimilarity, equiv_induced, CharacteristicSpec, Partition, Witness};
pub use refine::{coarse_image, refine};
pub use strategy::{
    filter_with, filtration_candidates, CandidateSpace, FilterOptions, Strategy,
    DEFAULT_SEARCH_BOUND,
};

#[derive(Debug, Error)]
pub enum FiltrationError {
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("gamma is not Sub-closed: missing `{0}`")]
    NotSubClosed(String),
    #[error("gamma formula `{0}` uses a compound program; filtrations need atomic modalities")]
    NonAtomicGamma(String),
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("strategy {strategy} failed: {reason}")]
    StrategyFailed { strategy: String, reason: String },
    #[error("relation search has {free} free pairs, bound allows at most {bound}")]
    SearchTooLarge { free: usize, bound: u32 },
    #[error("the finer partition does not refine the certificate's partition")]
    NotARefinement,
    #[error("the finer partition carries no definability witness")]
    MissingWitness,
    #[error(transparent)]
    Fusion(#[from] Box<FusionError>),
}

/// Checks Γ uses atomic modalities only and is Sub-closed.
pub fn check_gamma(gamma: &FormulaSet) -> Result<(), FiltrationError> {
    if let Some(f) = gamma.iter().find(|f| !f.is_basic_modal()) {
        return Err(FiltrationError::NonAtomicGamma(f.to_string()));
    }
    if let Some(f) = gamma.closure().iter().find(|f| !gamma.contains(f)) {
        return Err(FiltrationError::NotSubClosed(f.to_string()));
    }
    Ok(())
}

/// `[x] R_∼ [y]` iff some `x' ∼ x`, `y' ∼ y` have `x' R y'`.
pub fn min_filtered(m: &Model, p: &Partition, modality: &str) -> Result<Relation, KripkeError> {
    let r = m.relation(modality)?;
    let mut out = Relation::empty(p.len());
    for (x, y) in r.pairs() {
        out.insert(p.class_of(x), p.class_of(y));
    }
    Ok(out)
}

/// `[x] R^Γ_∼ [y]` iff for every `◇ψ ∈ Γ`, `y ⊨ ψ` implies `x ⊨ ◇ψ`.
///
/// Quantifies over all members of both blocks, which agrees with the
/// representative-based reading whenever the partition refines `∼_Γ`.
pub fn max_filtered(
    m: &Model,
    p: &Partition,
    gamma: &FormulaSet,
    modality: &str,
) -> Result<Relation, KripkeError> {
    m.relation(modality)?;
    let k = p.len();
    let mut out = Relation::full(k);
    for (dm, psi) in gamma.diamonds() {
        if dm != modality {
            continue;
        }
        let psi_set = eval(m, psi)?;
        let dia_set = m.relation(modality)?.preimage(&psi_set);
        // blocks containing a ψ-point, blocks containing a ¬◇ψ point
        let mut has_psi = StateSet::empty(k);
        let mut lacks_dia = StateSet::empty(k);
        for x in psi_set.iter() {
            has_psi.insert(p.class_of(x));
        }
        for x in dia_set.complement().iter() {
            lacks_dia.insert(p.class_of(x));
        }
        for bx in lacks_dia.iter() {
            for by in has_psi.iter() {
                out.remove(bx, by);
            }
        }
    }
    Ok(out)
}

/// Quotient of `m` by `p`: the given relations on blocks, and `θ̂(v)` the
/// blocks meeting `θ(v)` for every variable of Γ.
pub fn quotient_model(
    m: &Model,
    gamma: &FormulaSet,
    p: &Partition,
    relations: BTreeMap<String, Relation>,
) -> Model {
    let names: Vec<String> = (0..p.len()).map(|b| p.block_name(m, b)).collect();
    let mut q = Model::new(names, Vec::<String>::new());
    for (name, r) in relations {
        q.set_relation(name, r).expect("relation sized to the partition");
    }
    for v in gamma.vars() {
        let set = m.var(v);
        let mut blocks = StateSet::empty(p.len());
        for x in set.iter() {
            blocks.insert(p.class_of(x));
        }
        q.set_var(v, blocks);
    }
    q
}

/// Outcome of re-checking the filtration conditions; `None` fields passed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiltrationReport {
    /// Two states in one block that disagree on a Γ-formula.
    pub refines_gamma: Option<(usize, usize, Formula)>,
    /// A state and a Γ-variable on which source and quotient disagree.
    pub valuation: Option<(usize, u32)>,
    /// A minimal-relation pair missing from the quotient relation.
    pub lower_bound: Option<(String, usize, usize)>,
    /// A quotient pair outside the maximal relation, with the blocking ψ.
    pub upper_bound: Option<(String, usize, usize, Formula)>,
    /// A state and Γ-formula where truth is not preserved.
    pub lemma: Option<(usize, Formula)>,
    /// Whether the partition is the equivalence induced by its witness
    /// (with Γ ⊆ Δ); `None` when no witness is attached or it cannot be
    /// evaluated in the source.
    pub definable: Option<bool>,
}

impl FiltrationReport {
    pub fn conditions_hold(&self) -> bool {
        self.refines_gamma.is_none()
            && self.valuation.is_none()
            && self.lower_bound.is_none()
            && self.upper_bound.is_none()
    }

    pub fn passed(&self) -> bool {
        self.conditions_hold() && self.lemma.is_none() && self.definable != Some(false)
    }
}

#[derive(Debug, Clone)]
pub struct FiltrationCertificate {
    pub source: Model,
    pub gamma: FormulaSet,
    pub partition: Partition,
    pub quotient: Model,
    pub strategy: String,
    /// Free-form note on how the relations were chosen.
    pub detail: Option<String>,
    pub report: Option<FiltrationReport>,
    pub logic_check: Option<Validation>,
}

impl FiltrationCertificate {
    /// Certificate for explicitly chosen quotient relations; not yet checked.
    pub fn from_relations(
        source: &Model,
        gamma: &FormulaSet,
        partition: Partition,
        relations: BTreeMap<String, Relation>,
        strategy: impl Into<String>,
    ) -> Self {
        let quotient = quotient_model(source, gamma, &partition, relations);
        FiltrationCertificate {
            source: source.clone(),
            gamma: gamma.clone(),
            partition,
            quotient,
            strategy: strategy.into(),
            detail: None,
            report: None,
            logic_check: None,
        }
    }

    /// Certificate for a quotient supplied from outside, with `map[x]` the
    /// quotient state of source state `x`.
    pub fn from_parts(
        source: &Model,
        gamma: &FormulaSet,
        map: Vec<usize>,
        quotient: Model,
    ) -> Result<Self, FiltrationError> {
        if map.len() != source.len() {
            return Err(FiltrationError::Structural(format!(
                "map covers {} states, source has {}",
                map.len(),
                source.len()
            )));
        }
        let partition =
            Partition::from_class_map(map, quotient.len()).map_err(FiltrationError::Structural)?;
        Ok(FiltrationCertificate {
            source: source.clone(),
            gamma: gamma.clone(),
            partition,
            quotient,
            strategy: "external".into(),
            detail: None,
            report: None,
            logic_check: None,
        })
    }

    pub fn map(&self) -> &[usize] {
        self.partition.class_map()
    }

    pub fn delta(&self) -> Option<&Witness> {
        self.partition.witness()
    }

    /// Strict: the witness is exactly Γ.
    pub fn is_strict(&self) -> bool {
        self.delta()
            .is_some_and(|w| w.is_explicit() && w.formulas.len() == self.gamma.len() && w.formulas.iter().all(|f| self.gamma.contains(f)))
    }

    pub fn counter_assignment(&self) -> Option<&CounterAssignment> {
        self.logic_check.as_ref().and_then(|v| v.counter.as_ref())
    }
}

fn structural_check(cert: &FiltrationCertificate) -> Result<(), FiltrationError> {
    let m = &cert.source;
    let p = &cert.partition;
    if p.universe() != m.len() {
        return Err(FiltrationError::Structural(format!(
            "partition covers {} states, source has {}",
            p.universe(),
            m.len()
        )));
    }
    for (b, block) in p.blocks().iter().enumerate() {
        if block.is_empty() {
            return Err(FiltrationError::Structural(format!("block {b} is empty")));
        }
        if let Some(x) = block.iter().find(|&x| p.class_of(x) != b) {
            return Err(FiltrationError::Structural(format!(
                "state {x} listed in block {b} but mapped to block {}",
                p.class_of(x)
            )));
        }
    }
    if cert.quotient.len() != p.len() {
        return Err(FiltrationError::Structural(format!(
            "quotient has {} states, partition has {} blocks",
            cert.quotient.len(),
            p.len()
        )));
    }
    let src: Vec<&str> = m.alphabet().collect();
    let dst: Vec<&str> = cert.quotient.alphabet().collect();
    if src != dst {
        return Err(FiltrationError::Structural(format!(
            "alphabets differ: source {src:?}, quotient {dst:?}"
        )));
    }
    Ok(())
}

/// Re-verifies every filtration condition and the Filtration Lemma.
pub fn check_filtration(cert: &FiltrationCertificate) -> Result<FiltrationReport, FiltrationError> {
    check_gamma(&cert.gamma)?;
    structural_check(cert)?;
    let m = &cert.source;
    let q = &cert.quotient;
    let p = &cert.partition;
    let mut report = FiltrationReport::default();

    let gamma: Vec<&Formula> = cert.gamma.iter().collect();
    let truth: Vec<StateSet> = gamma.iter().map(|f| eval(m, f)).collect::<Result<_, _>>()?;

    // 1. the partition refines ∼_Γ
    'outer: for block in p.blocks() {
        let rep = block.first().expect("non-empty block");
        for x in block.iter() {
            if let Some(i) = truth.iter().position(|t| t.contains(x) != t.contains(rep)) {
                report.refines_gamma = Some((rep, x, gamma[i].clone()));
                break 'outer;
            }
        }
    }

    // 2. valuation agrees on Γ-variables
    'vars: for v in cert.gamma.iter().filter_map(|f| match f {
        Formula::Var(v) => Some(*v),
        _ => None,
    }) {
        let src = m.var(v);
        let dst = q.var(v);
        for x in 0..m.len() {
            if src.contains(x) != dst.contains(p.class_of(x)) {
                report.valuation = Some((x, v));
                break 'vars;
            }
        }
    }

    // 3. min ⊆ R̂ ⊆ max for each modality
    for name in m.alphabet() {
        let r_hat = q.relation(name)?;
        if report.lower_bound.is_none() {
            let min = min_filtered(m, p, name)?;
            let missing = min.pairs().find(|&(bx, by)| !r_hat.contains(bx, by));
            if let Some((bx, by)) = missing {
                report.lower_bound = Some((name.to_string(), bx, by));
            }
        }
        if report.upper_bound.is_none() {
            report.upper_bound = upper_bound_violation(m, p, &cert.gamma, name, r_hat)?;
        }
    }

    // Filtration Lemma, pointwise
    for (i, phi) in gamma.iter().enumerate() {
        let hat = eval(q, phi)?;
        if let Some(x) = (0..m.len()).find(|&x| truth[i].contains(x) != hat.contains(p.class_of(x))) {
            report.lemma = Some((x, (*phi).clone()));
            break;
        }
    }

    // A witness over modalities the source lacks (a fusion component seen
    // through its reduct) cannot be evaluated here; leave it unchecked.
    if let Some(w) = p.witness().filter(|w| w.modalities().iter().all(|a| m.has_modality(a))) {
        let induced = w.induced(m)?;
        let covers_gamma = cert.gamma.iter().all(|f| w.formulas.contains(f));
        report.definable = Some(covers_gamma && induced.same_blocks(p));
    }

    Ok(report)
}

fn upper_bound_violation(
    m: &Model,
    p: &Partition,
    gamma: &FormulaSet,
    name: &str,
    r_hat: &Relation,
) -> Result<Option<(String, usize, usize, Formula)>, KripkeError> {
    let r = m.relation(name)?;
    for (bx, by) in r_hat.pairs() {
        for (dm, psi) in gamma.diamonds() {
            if dm != name {
                continue;
            }
            let psi_set = eval(m, psi)?;
            let dia_set = r.preimage(&psi_set);
            let y_has = p.block(by).intersects(&psi_set);
            let x_lacks = !p.block(bx).is_subset(&dia_set);
            if y_has && x_lacks {
                return Ok(Some((name.to_string(), bx, by, psi.clone())));
            }
        }
    }
    Ok(None)
}
