//! The algebra of definable subsets of a finite model, and the check that a
//! model validates a logic given by axiom schemata.
//!
//! A model validates a normal logic exactly when every axiom evaluates to the
//! top element under every assignment of its variables to definable sets, so
//! the check below enumerates assignments into the definable algebra instead
//! of into the full powerset.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::bitset::StateSet;
use crate::kripke::{eval_with, KripkeError, Model, Valuation};
use crate::syntax::{Formula, FormulaSet};

pub const DEFAULT_CARRIER_CAP: usize = 1 << 20;
pub const DEFAULT_EVAL_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("definable algebra exceeded {cap} elements (reached {reached})")]
    CarrierCapExceeded { cap: usize, reached: usize },
    #[error("validity check needs {required} axiom evaluations, cap is {cap}")]
    EvalCapExceeded { required: u64, cap: u64 },
    #[error("axiom `{0}` uses a compound program; expand it against a completed model first")]
    NonAtomicAxiom(String),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub carrier_cap: usize,
    pub eval_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            carrier_cap: DEFAULT_CARRIER_CAP,
            eval_cap: DEFAULT_EVAL_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DefinableAlgebra {
    universe: usize,
    carrier: Vec<StateSet>,
    generators: BTreeMap<u32, StateSet>,
    modalities: Vec<String>,
}

impl DefinableAlgebra {
    /// Carrier sets in ascending order.
    pub fn carrier(&self) -> &[StateSet] {
        &self.carrier
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn contains(&self, s: &StateSet) -> bool {
        self.carrier.binary_search(s).is_ok()
    }

    pub fn generators(&self) -> &BTreeMap<u32, StateSet> {
        &self.generators
    }

    pub fn modalities(&self) -> &[String] {
        &self.modalities
    }

    pub fn universe(&self) -> usize {
        self.universe
    }
}

/// Closure of `{θ(p) | p ∈ vars}` under complement, intersection and every `f_◇`.
pub fn definable_algebra(
    m: &Model,
    vars: &BTreeSet<u32>,
    carrier_cap: usize,
) -> Result<DefinableAlgebra, AlgebraError> {
    let n = m.len();
    let relations: Vec<_> = m.relations().values().collect();
    let mut seen: HashSet<StateSet> = HashSet::new();
    let mut list: Vec<StateSet> = Vec::new();
    let push = |s: StateSet, seen: &mut HashSet<StateSet>, list: &mut Vec<StateSet>| -> Result<(), AlgebraError> {
        if seen.insert(s.clone()) {
            list.push(s);
            if list.len() > carrier_cap {
                return Err(AlgebraError::CarrierCapExceeded {
                    cap: carrier_cap,
                    reached: list.len(),
                });
            }
        }
        Ok(())
    };

    push(StateSet::empty(n), &mut seen, &mut list)?;
    push(StateSet::full(n), &mut seen, &mut list)?;
    let generators: BTreeMap<u32, StateSet> = vars.iter().map(|&v| (v, m.var(v))).collect();
    for s in generators.values() {
        push(s.clone(), &mut seen, &mut list)?;
    }

    let mut i = 0;
    while i < list.len() {
        let s = list[i].clone();
        push(s.complement(), &mut seen, &mut list)?;
        for r in &relations {
            push(r.preimage(&s), &mut seen, &mut list)?;
        }
        for j in 0..=i {
            let t = s.intersection(&list[j]);
            push(t, &mut seen, &mut list)?;
        }
        i += 1;
    }

    list.sort();
    Ok(DefinableAlgebra {
        universe: n,
        carrier: list,
        generators,
        modalities: m.alphabet().map(str::to_string).collect(),
    })
}

/// An assignment under which an axiom fails, with the first failing state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterAssignment {
    pub axiom: Formula,
    pub assignment: BTreeMap<u32, StateSet>,
    pub state: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub holds: bool,
    pub counter: Option<CounterAssignment>,
    pub carrier_size: usize,
    pub evaluations: u64,
}

/// Enumerates `carrier^k` in lexicographic order, first variable most significant.
struct Assignments<'a> {
    vars: Vec<u32>,
    carrier: &'a [StateSet],
    digits: Vec<usize>,
    done: bool,
}

impl<'a> Assignments<'a> {
    fn new(vars: Vec<u32>, carrier: &'a [StateSet]) -> Self {
        let done = carrier.is_empty() && !vars.is_empty();
        Assignments {
            digits: vec![0; vars.len()],
            vars,
            carrier,
            done,
        }
    }
}

impl Iterator for Assignments<'_> {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        if self.done {
            return None;
        }
        let out = self
            .vars
            .iter()
            .zip(&self.digits)
            .map(|(&v, &d)| (v, self.carrier[d].clone()))
            .collect();
        // odometer, last variable fastest
        let mut k = self.digits.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < self.carrier.len() {
                break;
            }
            self.digits[k] = 0;
        }
        Some(out)
    }
}

fn saturating_pow(base: u64, exp: usize) -> u64 {
    (0..exp).fold(1u64, |acc, _| acc.saturating_mul(base))
}

/// Checks every axiom against every assignment of its variables into `D(M)`.
pub fn model_validates(
    m: &Model,
    axioms: &FormulaSet,
    limits: Limits,
) -> Result<Validation, AlgebraError> {
    for ax in axioms {
        if !ax.is_basic_modal() {
            return Err(AlgebraError::NonAtomicAxiom(ax.to_string()));
        }
        for a in ax.atoms() {
            m.relation(&a)?;
        }
    }
    let valued: BTreeSet<u32> = m.valuation().keys().copied().collect();
    let algebra = definable_algebra(m, &valued, limits.carrier_cap)?;
    validates_in(m, &algebra, axioms, limits.eval_cap)
}

/// As [`model_validates`], against a precomputed algebra of `m`.
pub fn validates_in(
    m: &Model,
    algebra: &DefinableAlgebra,
    axioms: &FormulaSet,
    eval_cap: u64,
) -> Result<Validation, AlgebraError> {
    let carrier = algebra.carrier();
    let required = axioms.iter().fold(0u64, |acc, ax| {
        acc.saturating_add(saturating_pow(carrier.len() as u64, ax.vars().len()))
    });
    if required > eval_cap {
        return Err(AlgebraError::EvalCapExceeded {
            required,
            cap: eval_cap,
        });
    }

    let mut evaluations = 0;
    for ax in axioms {
        let vars: Vec<u32> = ax.vars().into_iter().collect();
        for assignment in Assignments::new(vars, carrier) {
            evaluations += 1;
            let truth = eval_with(m, &assignment, ax)?;
            if !truth.is_full() {
                let state = truth.complement().first().expect("non-full set has a gap");
                return Ok(Validation {
                    holds: false,
                    counter: Some(CounterAssignment {
                        axiom: ax.clone(),
                        assignment,
                        state,
                    }),
                    carrier_size: carrier.len(),
                    evaluations,
                });
            }
        }
    }
    Ok(Validation {
        holds: true,
        counter: None,
        carrier_size: carrier.len(),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::eval;
    use crate::syntax::parse_formula;

    fn e1() -> Model {
        let mut m = Model::new(["x", "y", "y'", "z", "u"], ["a"]);
        for (s, t) in [(0, 1), (2, 3), (3, 4)] {
            m.add_edge("a", s, t).unwrap();
        }
        m.set_var(0, StateSet::from_iter(5, [0]));
        m.set_var(1, StateSet::from_iter(5, [1, 2]));
        m.set_var(2, StateSet::from_iter(5, [4]));
        m
    }

    fn collapse3() -> FormulaSet {
        [parse_formula("<a><a><a>p0 -> <a>p0", &["a"]).unwrap()]
            .into_iter()
            .collect()
    }

    #[test]
    fn two_element_algebra() {
        let mut m = Model::with_size(1, ["a"]);
        m.set_var(0, StateSet::full(1));
        let alg = definable_algebra(&m, &BTreeSet::from([0]), 100).unwrap();
        assert_eq!(alg.carrier(), &[StateSet::empty(1), StateSet::full(1)]);
    }

    #[test]
    fn closure_reaches_preimages() {
        let m = e1();
        let alg = definable_algebra(&m, &BTreeSet::from([0, 1, 2]), 1 << 10).unwrap();
        assert!(alg.contains(&StateSet::singleton(5, 3)));
        for s in alg.carrier() {
            assert!(alg.contains(&s.complement()));
        }
    }

    #[test]
    fn degenerate_generators() {
        let m = e1();
        let alg = definable_algebra(&m, &BTreeSet::new(), 100).unwrap();
        // f(W) = {x, y', z}, its complement, f of those, ... all inside the closure
        let f_w = m.relation("a").unwrap().preimage(&StateSet::full(5));
        assert!(alg.contains(&StateSet::empty(5)));
        assert!(alg.contains(&StateSet::full(5)));
        assert!(alg.contains(&f_w));
        assert!(alg.contains(&m.relation("a").unwrap().preimage(&f_w)));
    }

    #[test]
    fn carrier_cap_is_reported() {
        let m = e1();
        let err = definable_algebra(&m, &BTreeSet::from([0, 1, 2]), 4).unwrap_err();
        assert_eq!(err, AlgebraError::CarrierCapExceeded { cap: 4, reached: 5 });
    }

    #[test]
    fn counterexample_model_validates_collapse() {
        let v = model_validates(&e1(), &collapse3(), Limits::default()).unwrap();
        assert!(v.holds);
        assert!(model_validates(&e1(), &FormulaSet::new(), Limits::default())
            .unwrap()
            .holds);
    }

    #[test]
    fn chain_quotient_fails_collapse() {
        // [x] -> [y] -> [z] -> [u]
        let mut q = Model::new(["[x]", "[y]", "[z]", "[u]"], ["a"]);
        for (s, t) in [(0, 1), (1, 2), (2, 3)] {
            q.add_edge("a", s, t).unwrap();
        }
        q.set_var(0, StateSet::from_iter(4, [0]));
        q.set_var(1, StateSet::from_iter(4, [1]));
        q.set_var(2, StateSet::from_iter(4, [3]));
        let v = model_validates(&q, &collapse3(), Limits::default()).unwrap();
        assert!(!v.holds);
        let counter = v.counter.unwrap();
        assert_eq!(counter.assignment[&0], StateSet::singleton(4, 3));
        assert_eq!(counter.state, 0);
    }

    #[test]
    fn eval_cap_is_reported() {
        let limits = Limits {
            carrier_cap: 1 << 10,
            eval_cap: 3,
        };
        assert!(matches!(
            model_validates(&e1(), &collapse3(), limits),
            Err(AlgebraError::EvalCapExceeded { cap: 3, .. })
        ));
    }

    #[test]
    fn compound_axioms_rejected() {
        let ax: FormulaSet = [parse_formula("<a^+>p0 -> <a>p0", &["a"]).unwrap()]
            .into_iter()
            .collect();
        assert!(matches!(
            model_validates(&e1(), &ax, Limits::default()),
            Err(AlgebraError::NonAtomicAxiom(_))
        ));
    }

    #[test]
    fn formulas_land_in_carrier() {
        let m = e1();
        let alg = definable_algebra(&m, &BTreeSet::from([0, 1, 2]), 1 << 10).unwrap();
        for text in ["<a>p2 & !p1", "[a]false", "<a><a>p2 | p0", "p1 -> <a>true"] {
            let s = eval(&m, &parse_formula(text, &["a"]).unwrap()).unwrap();
            assert!(alg.contains(&s), "{text}");
        }
    }
}
