//! Independent oracles and random generators shared by the integration
//! tests. The oracles work on plain sets of pairs and per-state recursion,
//! not on the crate's bitsets or evaluator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use modal_filtration::bitset::{Relation, StateSet};
use modal_filtration::syntax::{Formula, FormulaSet, Program};
use modal_filtration::Model;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Pairs = BTreeSet<(usize, usize)>;
pub type NaiveValuation = BTreeMap<u32, BTreeSet<usize>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn pairs_of(m: &Model, name: &str) -> Pairs {
    let r = m.relation(name).unwrap();
    let mut out = Pairs::new();
    for x in 0..m.len() {
        for y in 0..m.len() {
            if r.contains(x, y) {
                out.insert((x, y));
            }
        }
    }
    out
}

pub fn naive_program(m: &Model, e: &Program) -> Pairs {
    match e {
        Program::Atom(a) => pairs_of(m, a),
        Program::Union(a, b) => naive_program(m, a).union(&naive_program(m, b)).copied().collect(),
        Program::Comp(a, b) => {
            let (ra, rb) = (naive_program(m, a), naive_program(m, b));
            let mut out = Pairs::new();
            for &(x, y) in &ra {
                for &(y2, z) in &rb {
                    if y == y2 {
                        out.insert((x, z));
                    }
                }
            }
            out
        }
        Program::TransClos(a) => {
            let mut out = naive_program(m, a);
            loop {
                let mut grown = out.clone();
                for &(x, y) in &out {
                    for &(y2, z) in &out {
                        if y == y2 {
                            grown.insert((x, z));
                        }
                    }
                }
                if grown.len() == out.len() {
                    return out;
                }
                out = grown;
            }
        }
        Program::Converse(a) => naive_program(m, a).into_iter().map(|(x, y)| (y, x)).collect(),
    }
}

pub fn naive_valuation(m: &Model) -> NaiveValuation {
    m.valuation()
        .iter()
        .map(|(&v, s)| (v, s.iter().collect()))
        .collect()
}

/// Per-state truth of `phi`.
pub fn holds(m: &Model, val: &NaiveValuation, phi: &Formula, x: usize) -> bool {
    match phi {
        Formula::Bot => false,
        Formula::Var(v) => val.get(v).is_some_and(|s| s.contains(&x)),
        Formula::Imp(a, b) => !holds(m, val, a, x) || holds(m, val, b, x),
        Formula::Diamond(e, a) => naive_program(m, e)
            .iter()
            .any(|&(s, t)| s == x && holds(m, val, a, t)),
    }
}

pub fn truth(m: &Model, phi: &Formula) -> BTreeSet<usize> {
    let val = naive_valuation(m);
    (0..m.len()).filter(|&x| holds(m, &val, phi, x)).collect()
}

pub fn random_relation(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Relation {
    let mut r = Relation::empty(n);
    for x in 0..n {
        for y in 0..n {
            if rng.gen_bool(density) {
                r.insert(x, y);
            }
        }
    }
    r
}

pub fn random_set(rng: &mut ChaCha8Rng, n: usize) -> StateSet {
    StateSet::from_iter(n, (0..n).filter(|_| rng.gen_bool(0.4)))
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize, modalities: &[&str], vars: u32) -> Model {
    let mut m = Model::with_size(n, modalities.iter().copied());
    for name in modalities {
        let density = rng.gen_range(0.1..0.5);
        m.set_relation(*name, random_relation(rng, n, density)).unwrap();
    }
    for v in 0..vars {
        m.set_var(v, random_set(rng, n));
    }
    m
}

pub fn random_program(rng: &mut ChaCha8Rng, modalities: &[&str], depth: usize) -> Program {
    if depth == 0 {
        return Program::atom(*modalities.choose(rng).unwrap());
    }
    match rng.gen_range(0..5) {
        0 => Program::atom(*modalities.choose(rng).unwrap()),
        1 => Program::union(random_program(rng, modalities, depth - 1), random_program(rng, modalities, depth - 1)),
        2 => Program::comp(random_program(rng, modalities, depth - 1), random_program(rng, modalities, depth - 1)),
        3 => Program::plus(random_program(rng, modalities, depth - 1)),
        _ => Program::converse(random_program(rng, modalities, depth - 1)),
    }
}

/// Basic-modal formula over `vars` and atomic `modalities`.
pub fn random_formula(rng: &mut ChaCha8Rng, vars: u32, modalities: &[&str], depth: usize) -> Formula {
    let leaf = |rng: &mut ChaCha8Rng| {
        if vars == 0 || rng.gen_bool(0.1) {
            if rng.gen_bool(0.5) {
                Formula::top()
            } else {
                Formula::Bot
            }
        } else {
            Formula::var(rng.gen_range(0..vars))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    let m = modalities[rng.gen_range(0..modalities.len())];
    match rng.gen_range(0..7) {
        0 => leaf(rng),
        1 => Formula::not(random_formula(rng, vars, modalities, depth - 1)),
        2 => Formula::and(
            random_formula(rng, vars, modalities, depth - 1),
            random_formula(rng, vars, modalities, depth - 1),
        ),
        3 => Formula::or(
            random_formula(rng, vars, modalities, depth - 1),
            random_formula(rng, vars, modalities, depth - 1),
        ),
        4 => Formula::imp(
            random_formula(rng, vars, modalities, depth - 1),
            random_formula(rng, vars, modalities, depth - 1),
        ),
        5 => Formula::dia(m, random_formula(rng, vars, modalities, depth - 1)),
        _ => Formula::bx(m, random_formula(rng, vars, modalities, depth - 1)),
    }
}

/// A Sub-closed Γ of at most `max` formulas, with at least one diamond when
/// the draw allows it.
pub fn random_gamma(rng: &mut ChaCha8Rng, vars: u32, modalities: &[&str], max: usize) -> FormulaSet {
    loop {
        let mut gamma = FormulaSet::new();
        for _ in 0..rng.gen_range(1..=2) {
            let depth = rng.gen_range(1..=3);
            let f = random_formula(rng, vars, modalities, depth);
            let grown = gamma.union(&[f].into_iter().collect::<FormulaSet>().closure());
            if grown.len() <= max {
                gamma = grown;
            }
        }
        if !gamma.is_empty() && gamma.len() <= max {
            return gamma;
        }
    }
}

/// Blocks of `∼_Γ` by truth vector, numbered by first state.
pub fn naive_classes(m: &Model, gamma: &FormulaSet) -> Vec<usize> {
    let truths: Vec<BTreeSet<usize>> = gamma.iter().map(|f| truth(m, f)).collect();
    let mut keys: Vec<Vec<bool>> = Vec::new();
    (0..m.len())
        .map(|x| {
            let key: Vec<bool> = truths.iter().map(|t| t.contains(&x)).collect();
            match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    keys.len() - 1
                }
            }
        })
        .collect()
}

/// Reflexive-transitive closure.
pub fn preorder_closure(mut r: Relation) -> Relation {
    for x in 0..r.size() {
        r.insert(x, x);
    }
    r.transitive_closure()
}

/// Smallest euclidean relation containing `r`.
pub fn euclidean_closure(mut r: Relation) -> Relation {
    loop {
        let mut grown = r.clone();
        for x in 0..r.size() {
            let succ: Vec<usize> = r.successors(x).iter().collect();
            for &y in &succ {
                for &z in &succ {
                    grown.insert(y, z);
                }
            }
        }
        if grown == r {
            return r;
        }
        r = grown;
    }
}

/// Equivalence with random classes.
pub fn random_equivalence(rng: &mut ChaCha8Rng, n: usize) -> Relation {
    let class: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n.max(1))).collect();
    let mut r = Relation::empty(n);
    for x in 0..n {
        for y in 0..n {
            if class[x] == class[y] {
                r.insert(x, y);
            }
        }
    }
    r
}

/// Adds `R^k` until `R^k ⊆ R`.
pub fn collapse_closure(mut r: Relation, k: usize) -> Relation {
    loop {
        let mut step = Relation::identity(r.size());
        for _ in 0..k {
            step = step.compose(&r);
        }
        if step.is_subset(&r) {
            return r;
        }
        r = r.union(&step);
    }
}
