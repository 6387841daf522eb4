//! Formulas over atomic modalities and test-free programs with converse.
//!
//! Only `⊥`, variables, `→` and `⟨e⟩` are stored. Negation, conjunction,
//! disjunction, `⊤` and boxes are expanded by the smart constructors below and
//! recognised again by the printer.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;
use thiserror::Error;

pub use parse::{parse_formula, parse_program};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown modality `{name}` at offset {offset}")]
    UnknownModality { name: String, offset: usize },
    #[error("modality `{0}` has no entry in the renaming")]
    MissingRename(String),
    #[error("renaming is not injective: `{0}` and `{1}` map to the same modality")]
    NonInjectiveRename(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Atom(String),
    Union(Box<Program>, Box<Program>),
    Comp(Box<Program>, Box<Program>),
    TransClos(Box<Program>),
    Converse(Box<Program>),
}

impl Program {
    pub fn atom(name: impl Into<String>) -> Self {
        Program::Atom(name.into())
    }

    pub fn union(a: Program, b: Program) -> Self {
        Program::Union(Box::new(a), Box::new(b))
    }

    pub fn comp(a: Program, b: Program) -> Self {
        Program::Comp(Box::new(a), Box::new(b))
    }

    pub fn plus(a: Program) -> Self {
        Program::TransClos(Box::new(a))
    }

    pub fn converse(a: Program) -> Self {
        Program::Converse(Box::new(a))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Program::Atom(_))
    }

    pub fn atom_name(&self) -> Option<&str> {
        match self {
            Program::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Program::Atom(_) => 0,
            Program::Union(a, b) | Program::Comp(a, b) => 1 + a.depth().max(b.depth()),
            Program::TransClos(a) | Program::Converse(a) => 1 + a.depth(),
        }
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Program::Atom(a) => {
                out.insert(a.clone());
            }
            Program::Union(a, b) | Program::Comp(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Program::TransClos(a) | Program::Converse(a) => a.collect_atoms(out),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn rename(&self, renaming: &BTreeMap<String, String>) -> Result<Program, SyntaxError> {
        Ok(match self {
            Program::Atom(a) => Program::Atom(
                renaming
                    .get(a)
                    .cloned()
                    .ok_or_else(|| SyntaxError::MissingRename(a.clone()))?,
            ),
            Program::Union(a, b) => Program::union(a.rename(renaming)?, b.rename(renaming)?),
            Program::Comp(a, b) => Program::comp(a.rename(renaming)?, b.rename(renaming)?),
            Program::TransClos(a) => Program::plus(a.rename(renaming)?),
            Program::Converse(a) => Program::converse(a.rename(renaming)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Bot,
    Var(u32),
    Imp(Box<Formula>, Box<Formula>),
    Diamond(Program, Box<Formula>),
}

impl Formula {
    pub fn var(i: u32) -> Self {
        Formula::Var(i)
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Self {
        Formula::imp(a, Formula::Bot)
    }

    pub fn top() -> Self {
        Formula::not(Formula::Bot)
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::imp(a, Formula::not(b)))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::imp(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    pub fn diamond(e: Program, a: Formula) -> Self {
        Formula::Diamond(e, Box::new(a))
    }

    pub fn boxed(e: Program, a: Formula) -> Self {
        Formula::not(Formula::diamond(e, Formula::not(a)))
    }

    /// `⟨m⟩` for an atomic modality `m`.
    pub fn dia(m: &str, a: Formula) -> Self {
        Formula::diamond(Program::atom(m), a)
    }

    /// `[m]` for an atomic modality `m`.
    pub fn bx(m: &str, a: Formula) -> Self {
        Formula::boxed(Program::atom(m), a)
    }

    /// `⟨m⟩^k a`.
    pub fn dia_pow(m: &str, k: usize, a: Formula) -> Self {
        (0..k).fold(a, |acc, _| Formula::dia(m, acc))
    }

    pub fn is_negation(&self) -> Option<&Formula> {
        match self {
            Formula::Imp(a, b) if **b == Formula::Bot => Some(a),
            _ => None,
        }
    }

    /// Number of AST nodes, programs counted as one node.
    pub fn size(&self) -> usize {
        match self {
            Formula::Bot | Formula::Var(_) => 1,
            Formula::Imp(a, b) => 1 + a.size() + b.size(),
            Formula::Diamond(_, a) => 1 + a.size(),
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Bot | Formula::Var(_) => 0,
            Formula::Imp(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Diamond(_, a) => 1 + a.modal_depth(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            Formula::Bot => {}
            Formula::Var(i) => {
                out.insert(*i);
            }
            Formula::Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Diamond(_, a) => a.collect_vars(out),
        }
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bot | Formula::Var(_) => {}
            Formula::Imp(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Diamond(e, a) => {
                e.collect_atoms(out);
                a.collect_atoms(out);
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    /// True when every diamond is indexed by an atomic modality.
    pub fn is_basic_modal(&self) -> bool {
        match self {
            Formula::Bot | Formula::Var(_) => true,
            Formula::Imp(a, b) => a.is_basic_modal() && b.is_basic_modal(),
            Formula::Diamond(e, a) => e.is_atomic() && a.is_basic_modal(),
        }
    }

    fn push_subformulas(&self, out: &mut IndexSet<Formula>) {
        if out.contains(self) {
            return;
        }
        out.insert(self.clone());
        match self {
            Formula::Bot | Formula::Var(_) => {}
            Formula::Imp(a, b) => {
                a.push_subformulas(out);
                b.push_subformulas(out);
            }
            Formula::Diamond(_, a) => a.push_subformulas(out),
        }
    }
}

/// Smallest Sub-closed set containing `phi`.
pub fn sub_closure(phi: &Formula) -> FormulaSet {
    let mut out = IndexSet::new();
    phi.push_subformulas(&mut out);
    FormulaSet { items: out }
}

/// Simultaneous substitution; variables outside `sigma` are left alone.
pub fn substitute(phi: &Formula, sigma: &BTreeMap<u32, Formula>) -> Formula {
    match phi {
        Formula::Bot => Formula::Bot,
        Formula::Var(i) => sigma.get(i).cloned().unwrap_or(Formula::Var(*i)),
        Formula::Imp(a, b) => Formula::imp(substitute(a, sigma), substitute(b, sigma)),
        Formula::Diamond(e, a) => Formula::diamond(e.clone(), substitute(a, sigma)),
    }
}

/// Renames every program atom of `phi`.
pub fn shift_alphabet(
    phi: &Formula,
    renaming: &BTreeMap<String, String>,
) -> Result<Formula, SyntaxError> {
    let atoms = phi.atoms();
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    for a in &atoms {
        let target = renaming
            .get(a)
            .ok_or_else(|| SyntaxError::MissingRename(a.clone()))?;
        if let Some(prev) = seen.insert(target, a) {
            return Err(SyntaxError::NonInjectiveRename(prev.to_string(), a.clone()));
        }
    }
    fn go(phi: &Formula, renaming: &BTreeMap<String, String>) -> Result<Formula, SyntaxError> {
        Ok(match phi {
            Formula::Bot | Formula::Var(_) => phi.clone(),
            Formula::Imp(a, b) => Formula::imp(go(a, renaming)?, go(b, renaming)?),
            Formula::Diamond(e, a) => Formula::diamond(e.rename(renaming)?, go(a, renaming)?),
        })
    }
    go(phi, renaming)
}

/// Duplicate-free, insertion-ordered collection of formulas.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormulaSet {
    items: IndexSet<Formula>,
}

impl FormulaSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, phi: Formula) -> bool {
        self.items.insert(phi)
    }

    pub fn contains(&self, phi: &Formula) -> bool {
        self.items.contains(phi)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.items.iter()
    }

    pub fn extend<I: IntoIterator<Item = Formula>>(&mut self, iter: I) {
        self.items.extend(iter);
    }

    pub fn union(&self, other: &FormulaSet) -> FormulaSet {
        let mut out = self.clone();
        out.extend(other.iter().cloned());
        out
    }

    /// Smallest Sub-closed superset, members first in their original order.
    pub fn closure(&self) -> FormulaSet {
        let mut out = IndexSet::new();
        for phi in &self.items {
            phi.push_subformulas(&mut out);
        }
        // keep the caller's formulas in front
        let mut ordered: IndexSet<Formula> = self.items.clone();
        ordered.extend(out);
        FormulaSet { items: ordered }
    }

    pub fn is_sub_closed(&self) -> bool {
        self.closure().len() == self.len()
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for phi in &self.items {
            phi.collect_vars(&mut out);
        }
        out
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for phi in &self.items {
            phi.collect_atoms(&mut out);
        }
        out
    }

    /// Formulas `⟨m⟩ψ` with `m` atomic, as `(m, ψ)`.
    pub fn diamonds(&self) -> Vec<(&str, &Formula)> {
        self.items
            .iter()
            .filter_map(|phi| match phi {
                Formula::Diamond(Program::Atom(m), psi) => Some((m.as_str(), &**psi)),
                _ => None,
            })
            .collect()
    }

    pub fn max_var(&self) -> Option<u32> {
        self.vars().into_iter().next_back()
    }
}

impl FromIterator<Formula> for FormulaSet {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        FormulaSet {
            items: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a FormulaSet {
    type Item = &'a Formula;
    type IntoIter = indexmap::set::Iter<'a, Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}
