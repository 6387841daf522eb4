use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{
    bisim_coarsest, check_filtration, check_gamma, equiv_induced, max_filtered, min_filtered,
    FiltrationCertificate, FiltrationError, Partition, Witness,
};
use crate::algebra::{model_validates, Limits};
use crate::bitset::Relation;
use crate::fusion::LogicSpec;
use crate::kripke::{eval, Model};
use crate::syntax::{Formula, FormulaSet};

/// Largest number of free pairs the exhaustive strategies will enumerate.
pub const DEFAULT_SEARCH_BOUND: u32 = 20;

/// How the quotient relations (and sometimes the partition) are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// `R̂ = min` on `∼_Γ`.
    Minimal,
    /// `min ∪ id`.
    Reflexive,
    /// Transitive closure of the Γ-boxes (Lemmon).
    Lemmon,
    /// Lemmon plus reflexivity.
    S4,
    /// Blocks related iff they agree on every Γ-diamond.
    S5,
    /// `max ∩ max⁻¹`.
    Symmetric,
    /// `min` plus a loop on every dead-end block.
    Serial,
    /// `min` on the coarsest bisimulation respecting `vars(Γ)`.
    Bisim,
    /// `min` on `∼_Δ` with `Δ = {◇^i φ : i ≤ m}`, falling back to the
    /// `m`-collapse closure and then to search.
    Gabbay(usize),
    /// Exhaustive search on `∼_Γ` for a quotient validating the logic.
    Strict,
    /// As `Strict` with an explicit bound on free pairs.
    Search(u32),
    /// Fusion filtration over the component logics.
    Fusion(Vec<LogicSpec>),
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Minimal => f.write_str("minimal"),
            Strategy::Reflexive => f.write_str("reflexive"),
            Strategy::Lemmon => f.write_str("lemmon"),
            Strategy::S4 => f.write_str("s4"),
            Strategy::S5 => f.write_str("s5"),
            Strategy::Symmetric => f.write_str("symmetric"),
            Strategy::Serial => f.write_str("serial"),
            Strategy::Bisim => f.write_str("bisim"),
            Strategy::Gabbay(m) => write!(f, "gabbay({m})"),
            Strategy::Strict => f.write_str("strict"),
            Strategy::Search(b) => write!(f, "search({b})"),
            Strategy::Fusion(parts) => {
                let names: Vec<String> = parts.iter().map(ToString::to_string).collect();
                write!(f, "fusion({})", names.join(","))
            }
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let arg = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .map(str::trim)
        };
        Ok(match s {
            "minimal" => Strategy::Minimal,
            "reflexive" => Strategy::Reflexive,
            "lemmon" => Strategy::Lemmon,
            "s4" => Strategy::S4,
            "s5" => Strategy::S5,
            "symmetric" => Strategy::Symmetric,
            "serial" => Strategy::Serial,
            "bisim" => Strategy::Bisim,
            "strict" => Strategy::Strict,
            "search" => Strategy::Search(DEFAULT_SEARCH_BOUND),
            _ => {
                if let Some(m) = arg("gabbay") {
                    let m = m.parse().map_err(|_| format!("bad gabbay depth `{m}`"))?;
                    if m == 0 {
                        return Err("gabbay depth must be at least 1".into());
                    }
                    Strategy::Gabbay(m)
                } else if let Some(b) = arg("search") {
                    Strategy::Search(b.parse().map_err(|_| format!("bad search bound `{b}`"))?)
                } else {
                    return Err(format!("unknown strategy `{s}`"));
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterOptions {
    pub limits: Limits,
    pub search_bound: u32,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            limits: Limits::default(),
            search_bound: DEFAULT_SEARCH_BOUND,
        }
    }
}

/// Filters `m` through Γ with `strategy` and checks the quotient against
/// `logic`.
///
/// The model must validate the logic; the returned certificate has passed
/// [`check_filtration`] and its quotient validates the logic.
pub fn filter_with(
    m: &Model,
    gamma: &FormulaSet,
    strategy: &Strategy,
    logic: &LogicSpec,
    opts: &FilterOptions,
) -> Result<FiltrationCertificate, FiltrationError> {
    check_gamma(gamma)?;
    for a in gamma.atoms() {
        m.relation(&a)?;
    }
    if let Some(a) = logic.alphabet.iter().find(|a| !m.has_modality(a)) {
        return Err(FiltrationError::Precondition(format!(
            "modality `{a}` of {} is not in the model",
            logic.name
        )));
    }
    if let Strategy::Fusion(components) = strategy {
        return crate::fusion::fuse_filter(m, gamma, components, opts)
            .map(|(cert, _)| cert)
            .map_err(|e| FiltrationError::Fusion(Box::new(e)));
    }
    let validation = model_validates(m, &logic.axioms, opts.limits)?;
    if !validation.holds {
        let ax = validation.counter.map(|c| c.axiom.to_string()).unwrap_or_default();
        return Err(FiltrationError::Precondition(format!(
            "the model does not validate {} (axiom `{ax}`)",
            logic.name
        )));
    }

    let failed = |reason: String| FiltrationError::StrategyFailed {
        strategy: strategy.to_string(),
        reason,
    };
    let label = strategy.to_string();

    match strategy {
        Strategy::Strict => search(m, gamma, equiv_induced(m, gamma)?, logic, opts.search_bound, opts, &label, "strict"),
        Strategy::Search(b) => search(m, gamma, equiv_induced(m, gamma)?, logic, *b, opts, &label, "passing"),
        Strategy::Gabbay(k) => {
            let delta = gabbay_delta(m, gamma, *k);
            let p = equiv_induced(m, &delta)?;
            let min = relations(m, |name| min_filtered(m, &p, name).map_err(Into::into))?;
            let cert = FiltrationCertificate::from_relations(m, gamma, p.clone(), min.clone(), &label);
            let first = match finalize(cert, logic, opts, "min")? {
                Ok(cert) => return Ok(cert),
                Err(reason) => reason,
            };
            let closed = min
                .into_iter()
                .map(|(name, r)| (name, collapse_closure(r, *k)))
                .collect();
            let cert = FiltrationCertificate::from_relations(m, gamma, p.clone(), closed, &label);
            let second = match finalize(cert, logic, opts, "m-closure")? {
                Ok(cert) => return Ok(cert),
                Err(reason) => reason,
            };
            search(m, gamma, p, logic, opts.search_bound, opts, &label, "passing").map_err(|e| match e {
                FiltrationError::StrategyFailed { reason, .. } => {
                    failed(format!("min: {first}; m-closure: {second}; search: {reason}"))
                }
                other => other,
            })
        }
        Strategy::Bisim => {
            let b = bisim_coarsest(m, &gamma.vars())?;
            let mut w = b.witness().cloned().unwrap_or_default();
            w.formulas = gamma.clone();
            let p = b.with_witness(w);
            let rels = relations(m, |name| min_filtered(m, &p, name).map_err(Into::into))?;
            let cert = FiltrationCertificate::from_relations(m, gamma, p, rels, &label);
            finalize(cert, logic, opts, "min")?.map_err(failed)
        }
        _ => {
            let p = equiv_induced(m, gamma)?;
            let rels = relations(m, |name| simple_relation(strategy, m, &p, gamma, name))?;
            let cert = FiltrationCertificate::from_relations(m, gamma, p, rels, &label);
            finalize(cert, logic, opts, "direct")?.map_err(failed)
        }
    }
}

fn relations(
    m: &Model,
    f: impl Fn(&str) -> Result<Relation, FiltrationError>,
) -> Result<BTreeMap<String, Relation>, FiltrationError> {
    m.alphabet().map(|name| Ok((name.to_string(), f(name)?))).collect()
}

/// Per-block truth of `ψ` and `◇ψ` for every Γ-diamond on `name`.
fn diamond_profile(
    m: &Model,
    p: &Partition,
    gamma: &FormulaSet,
    name: &str,
) -> Result<Vec<(Vec<bool>, Vec<bool>)>, FiltrationError> {
    let mut out = Vec::new();
    for (dm, psi) in gamma.diamonds() {
        if dm != name {
            continue;
        }
        let psi_set = eval(m, psi)?;
        let dia_set = m.relation(name)?.preimage(&psi_set);
        let rep = |s: &crate::bitset::StateSet| (0..p.len()).map(|b| s.contains(p.representative(b))).collect();
        out.push((rep(&psi_set), rep(&dia_set)));
    }
    Ok(out)
}

fn simple_relation(
    strategy: &Strategy,
    m: &Model,
    p: &Partition,
    gamma: &FormulaSet,
    name: &str,
) -> Result<Relation, FiltrationError> {
    let k = p.len();
    let min = min_filtered(m, p, name)?;
    // keeps [x]R[y] iff keep(y ⊨ ψ, y ⊨ ◇ψ, x ⊨ ◇ψ) for every Γ-diamond
    let by_profile = |keep: &dyn Fn(bool, bool, bool) -> bool| -> Result<Relation, FiltrationError> {
        let profile = diamond_profile(m, p, gamma, name)?;
        let mut r = Relation::full(k);
        for (psi, dia) in &profile {
            for bx in 0..k {
                for by in 0..k {
                    if !keep(psi[by], dia[by], dia[bx]) {
                        r.remove(bx, by);
                    }
                }
            }
        }
        Ok(r)
    };
    Ok(match strategy {
        Strategy::Minimal => min,
        Strategy::Reflexive => min.union(&Relation::identity(k)),
        Strategy::Lemmon => by_profile(&|psi_y, dia_y, dia_x| !(psi_y || dia_y) || dia_x)?,
        Strategy::S4 => by_profile(&|psi_y, dia_y, dia_x| !(psi_y || dia_y) || dia_x)?
            .union(&Relation::identity(k)),
        Strategy::S5 => by_profile(&|_, dia_y, dia_x| dia_x == dia_y)?,
        Strategy::Symmetric => {
            let max = max_filtered(m, p, gamma, name)?;
            max.intersection(&max.converse())
        }
        Strategy::Serial => {
            let mut r = min;
            for b in 0..k {
                if r.successors(b).is_empty() {
                    r.insert(b, b);
                }
            }
            r
        }
        other => unreachable!("{other} is not a direct strategy"),
    })
}

/// `Δ = {◇^i φ : φ ∈ Γ, 0 ≤ i ≤ k}` for every modality of the model.
fn gabbay_delta(m: &Model, gamma: &FormulaSet, k: usize) -> FormulaSet {
    let mut delta = gamma.clone();
    for name in m.alphabet() {
        for phi in gamma.iter() {
            for i in 1..=k {
                delta.insert(Formula::dia_pow(name, i, phi.clone()));
            }
        }
    }
    delta
}

/// Adds `R^k` until `R^k ⊆ R`.
fn collapse_closure(mut r: Relation, k: usize) -> Relation {
    loop {
        let step = r.power(k);
        if step.is_subset(&r) {
            return r;
        }
        r = r.union(&step);
    }
}

/// Checks a candidate; the inner `Err` carries the reason it was rejected.
fn finalize(
    mut cert: FiltrationCertificate,
    logic: &LogicSpec,
    opts: &FilterOptions,
    detail: &str,
) -> Result<Result<FiltrationCertificate, String>, FiltrationError> {
    cert.detail = Some(detail.to_string());
    let report = check_filtration(&cert)?;
    if !report.passed() {
        return Ok(Err(format!("not a filtration: {report:?}")));
    }
    cert.report = Some(report);
    let validation = model_validates(&cert.quotient, &logic.axioms, opts.limits)?;
    let holds = validation.holds;
    let reason = validation
        .counter
        .as_ref()
        .map(|c| format!("quotient refutes `{}` at {}", c.axiom, cert.quotient.state_name(c.state)));
    cert.logic_check = Some(validation);
    Ok(if holds { Ok(cert) } else { Err(reason.unwrap_or_default()) })
}

/// Quotient relations between `min` and `max` on a fixed partition.
///
/// Candidates are numbered by a bitmask over [`CandidateSpace::free`], the
/// first free pair being the most significant bit.
#[derive(Debug, Clone)]
pub struct CandidateSpace {
    pub partition: Partition,
    pub min: BTreeMap<String, Relation>,
    /// `max \ min`, ordered by modality, then source block, then target.
    pub free: Vec<(String, usize, usize)>,
}

impl CandidateSpace {
    pub fn count(&self) -> u64 {
        1u64.checked_shl(self.free.len() as u32).unwrap_or(u64::MAX)
    }

    pub fn relations(&self, index: u64) -> BTreeMap<String, Relation> {
        let mut out = self.min.clone();
        let f = self.free.len();
        for (j, (name, bx, by)) in self.free.iter().enumerate() {
            if index >> (f - 1 - j) & 1 == 1 {
                out.get_mut(name).expect("free pair on a known modality").insert(*bx, *by);
            }
        }
        out
    }

    pub fn certificate(
        &self,
        m: &Model,
        gamma: &FormulaSet,
        index: u64,
        strategy: &str,
    ) -> FiltrationCertificate {
        FiltrationCertificate::from_relations(m, gamma, self.partition.clone(), self.relations(index), strategy)
    }
}

/// Every Γ-filtration of `m` through `p`, as a candidate space.
pub fn filtration_candidates(
    m: &Model,
    gamma: &FormulaSet,
    p: &Partition,
) -> Result<CandidateSpace, FiltrationError> {
    let mut min = BTreeMap::new();
    let mut free = Vec::new();
    for name in m.alphabet() {
        let lo = min_filtered(m, p, name)?;
        let hi = max_filtered(m, p, gamma, name)?;
        for bx in 0..p.len() {
            for by in 0..p.len() {
                if hi.contains(bx, by) && !lo.contains(bx, by) {
                    free.push((name.to_string(), bx, by));
                }
            }
        }
        min.insert(name.to_string(), lo);
    }
    Ok(CandidateSpace {
        partition: p.clone(),
        min,
        free,
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    m: &Model,
    gamma: &FormulaSet,
    p: Partition,
    logic: &LogicSpec,
    bound: u32,
    opts: &FilterOptions,
    label: &str,
    kind: &str,
) -> Result<FiltrationCertificate, FiltrationError> {
    let p = if p.witness().is_some() {
        p
    } else {
        p.with_witness(Witness::formulas(gamma.clone()))
    };
    let space = filtration_candidates(m, gamma, &p)?;
    if space.free.len() > bound as usize {
        return Err(FiltrationError::SearchTooLarge {
            free: space.free.len(),
            bound,
        });
    }
    let total = space.count();
    for i in 0..total {
        let cert = space.certificate(m, gamma, i, label);
        if let Ok(cert) = finalize(cert, logic, opts, &format!("search: candidate {i} of {total}"))? {
            return Ok(cert);
        }
    }
    Err(FiltrationError::StrategyFailed {
        strategy: label.to_string(),
        reason: format!("no {kind} filtration exists among {total} candidates"),
    })
}
