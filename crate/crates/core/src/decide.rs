//! Bounded finite-model search over frames meeting the logics' frame
//! conditions.
//!
//! States, relations and valuations are enumerated in a fixed lexicographic
//! order, so the first model found is deterministic. A negative answer only
//! says no model exists up to the bound.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::bitset::{Relation, StateSet};
use crate::fusion::LogicSpec;
use crate::kripke::{eval, FrameCondition, FrameEval, KripkeError, Model, Valuation};
use crate::syntax::Formula;

/// Default cap on the number of candidate frames.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum DecideError {
    #[error("logic {0} has no frame conditions; frame-based search would be unsound")]
    MissingFrameConditions(String),
    #[error("formula uses modality `{0}`, which no logic covers")]
    UncoveredModality(String),
    #[error(
        "budget of {budget} frames exhausted at size {at_size}; sizes up to {completed} fully searched"
    )]
    Budget {
        budget: u64,
        at_size: usize,
        completed: usize,
        frames: u64,
    },
    #[error(transparent)]
    Kripke(#[from] KripkeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub budget: u64,
    /// Skip frames that are not the lexicographically least in their
    /// isomorphism class.
    pub iso_prune: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_BUDGET,
            iso_prune: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Sat { model: Model, witness: usize },
    NoModelUpTo(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Conforming frames visited.
    pub frames: u64,
    /// Frame and valuation pairs evaluated.
    pub models: u64,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub verdict: Verdict,
    pub stats: SearchStats,
    pub n_max: usize,
}

impl SearchResult {
    pub fn is_sat(&self) -> bool {
        matches!(self.verdict, Verdict::Sat { .. })
    }

    /// The model file of a SAT verdict plus `witness` and `n_max`, or just
    /// the verdict for a negative one.
    pub fn to_json(&self) -> serde_json::Value {
        let mut out = match &self.verdict {
            Verdict::Sat { model, witness } => {
                let mut v = model.to_json_value();
                v["verdict"] = "SAT".into();
                v["witness"] = model.state_name(*witness).into();
                v
            }
            Verdict::NoModelUpTo(n) => serde_json::json!({ "verdict": format!("NO_MODEL_UP_TO({n})") }),
        };
        out["n_max"] = self.n_max.into();
        out["stats"] = serde_json::to_value(self.stats).expect("plain counters");
        out
    }
}

/// Frame conditions per modality, gathered from `specs`.
pub fn collect_conditions(
    specs: &[LogicSpec],
) -> Result<BTreeMap<String, BTreeSet<FrameCondition>>, DecideError> {
    let mut out: BTreeMap<String, BTreeSet<FrameCondition>> = BTreeMap::new();
    for s in specs {
        let conds = s
            .frame_conditions
            .as_ref()
            .ok_or_else(|| DecideError::MissingFrameConditions(s.name.clone()))?;
        for a in &s.alphabet {
            out.entry(a.clone()).or_default();
        }
        for (a, c) in conds {
            out.entry(a.clone()).or_default().insert(*c);
        }
    }
    Ok(out)
}

/// Searches for a model of size `1..=n_max` with a state satisfying `phi`.
pub fn bounded_sat(
    phi: &Formula,
    specs: &[LogicSpec],
    n_max: usize,
    opts: SearchOptions,
) -> Result<SearchResult, DecideError> {
    let conditions = collect_conditions(specs)?;
    if let Some(a) = phi.atoms().into_iter().find(|a| !conditions.contains_key(a)) {
        return Err(DecideError::UncoveredModality(a));
    }
    let vars: Vec<u32> = phi.vars().into_iter().collect();
    let mut stats = SearchStats::default();

    for n in 1..=n_max {
        let mut found = None;
        let mut budget_hit = false;
        let frames = Frames::new(n, &conditions);
        frames.for_each(|relations| {
            if opts.iso_prune && !is_canonical(n, relations) {
                return true;
            }
            if stats.frames >= opts.budget {
                budget_hit = true;
                return false;
            }
            stats.frames += 1;
            let mut model = Model::with_size(n, conditions.keys());
            for (name, r) in conditions.keys().zip(relations) {
                model.set_relation(name.clone(), r.clone()).expect("sized frame");
            }
            let hit = {
                let mut ev = FrameEval::new(&model);
                let mut digits = vec![0u64; vars.len()];
                loop {
                    stats.models += 1;
                    let valuation: Valuation = vars
                        .iter()
                        .zip(&digits)
                        .map(|(&v, &mask)| (v, StateSet::from_mask(n, mask)))
                        .collect();
                    let truth = ev.eval(&valuation, phi).expect("modalities checked up front");
                    if let Some(w) = truth.first() {
                        break Some((valuation, w));
                    }
                    if !advance(&mut digits, 1u64 << n) {
                        break None;
                    }
                }
            };
            match hit {
                Some((valuation, w)) => {
                    model.set_valuation(valuation);
                    found = Some((model, w));
                    false
                }
                None => true,
            }
        });
        if budget_hit {
            return Err(DecideError::Budget {
                budget: opts.budget,
                at_size: n,
                completed: n - 1,
                frames: stats.frames,
            });
        }
        if let Some((model, witness)) = found {
            let replay = eval(&model, phi)?;
            assert!(replay.contains(witness), "SAT replay failed");
            return Ok(SearchResult {
                verdict: Verdict::Sat { model, witness },
                stats,
                n_max,
            });
        }
    }
    Ok(SearchResult {
        verdict: Verdict::NoModelUpTo(n_max),
        stats,
        n_max,
    })
}

/// `bounded_sat(¬φ)`: a SAT verdict is a countermodel to the validity of `φ`.
pub fn bounded_countermodel(
    phi: &Formula,
    specs: &[LogicSpec],
    n_max: usize,
    opts: SearchOptions,
) -> Result<SearchResult, DecideError> {
    bounded_sat(&Formula::not(phi.clone()), specs, n_max, opts)
}

/// Number of frames of size `n` meeting `conditions` (no pruning).
pub fn count_frames(n: usize, conditions: &BTreeMap<String, BTreeSet<FrameCondition>>) -> u64 {
    let mut count = 0;
    Frames::new(n, conditions).for_each(|_| {
        count += 1;
        true
    });
    count
}

/// Odometer over `digits`, last digit fastest; false once it wraps.
fn advance(digits: &mut [u64], base: u64) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Backtracking enumeration of conforming frames.
///
/// Modalities in name order; within one, bits row-major with 0 tried before
/// 1. Conditions are checked on the rows decided so far, which prunes early
/// without skipping any conforming frame.
struct Frames<'a> {
    n: usize,
    conds: Vec<&'a BTreeSet<FrameCondition>>,
}

impl<'a> Frames<'a> {
    fn new(n: usize, conditions: &'a BTreeMap<String, BTreeSet<FrameCondition>>) -> Self {
        Frames {
            n,
            conds: conditions.values().collect(),
        }
    }

    /// Calls `visit` on each frame until it returns false.
    fn for_each(&self, mut visit: impl FnMut(&[Relation]) -> bool) {
        let mut rels: Vec<Relation> = self.conds.iter().map(|_| Relation::empty(self.n)).collect();
        self.go(0, 0, &mut rels, &mut visit);
    }

    fn go(
        &self,
        k: usize,
        bit: usize,
        rels: &mut Vec<Relation>,
        visit: &mut impl FnMut(&[Relation]) -> bool,
    ) -> bool {
        let n = self.n;
        if k == rels.len() {
            return visit(rels);
        }
        if bit == n * n {
            return self.go(k + 1, 0, rels, visit);
        }
        let (x, y) = (bit / n, bit % n);
        let conds = self.conds[k];
        let forced = forced_bit(conds, &rels[k], x, y);
        for value in [false, true] {
            if forced.is_some_and(|f| f != value) {
                continue;
            }
            if value {
                rels[k].insert(x, y);
            } else {
                rels[k].remove(x, y);
            }
            let row_done = y == n - 1;
            if row_done && !partial_ok(conds, &rels[k], x + 1) {
                continue;
            }
            if !self.go(k, bit + 1, rels, visit) {
                rels[k].remove(x, y);
                return false;
            }
        }
        rels[k].remove(x, y);
        true
    }
}

fn forced_bit(conds: &BTreeSet<FrameCondition>, r: &Relation, x: usize, y: usize) -> Option<bool> {
    use FrameCondition::*;
    if x == y && (conds.contains(&Reflexive) || conds.contains(&Equivalence)) {
        return Some(true);
    }
    if y < x && (conds.contains(&Symmetric) || conds.contains(&Equivalence)) {
        return Some(r.contains(y, x));
    }
    None
}

/// Checks every condition instance whose pairs all lie in rows `< rows`.
fn partial_ok(conds: &BTreeSet<FrameCondition>, r: &Relation, rows: usize) -> bool {
    use FrameCondition::*;
    let decided = |x: usize| x < rows;
    conds.iter().all(|c| match c {
        Reflexive | Symmetric => true, // forced bit by bit
        Serial => !r.successors(rows - 1).is_empty(),
        Transitive => (0..rows).all(|x| {
            r.successors(x)
                .iter()
                .filter(|&y| decided(y))
                .all(|y| r.successors(y).is_subset(r.successors(x)))
        }),
        Euclidean => (0..rows).all(|x| {
            r.successors(x)
                .iter()
                .filter(|&y| decided(y))
                .all(|y| r.successors(x).is_subset(r.successors(y)))
        }),
        Equivalence => partial_ok(&BTreeSet::from([Transitive]), r, rows),
        WeaklyTransitive => (0..rows).all(|x| {
            r.successors(x).iter().filter(|&y| decided(y)).all(|y| {
                r.successors(y).iter().all(|z| z == x || r.contains(x, z))
            })
        }),
        MCollapse(m) => (0..rows).all(|x| {
            let mut frontier = StateSet::singleton(r.size(), x);
            for _ in 0..*m {
                let mut next = StateSet::empty(r.size());
                for y in frontier.iter().filter(|&y| decided(y)) {
                    next.union_with(r.successors(y));
                }
                frontier = next;
            }
            frontier.is_subset(r.successors(x))
        }),
    })
}

/// True when no relabelling of the states gives a lexicographically smaller
/// frame encoding.
fn is_canonical(n: usize, rels: &[Relation]) -> bool {
    let key = |perm: &[usize]| -> Vec<bool> {
        let mut out = Vec::with_capacity(rels.len() * n * n);
        for r in rels {
            for x in 0..n {
                for y in 0..n {
                    out.push(r.contains(perm[x], perm[y]));
                }
            }
        }
        out
    };
    let identity: Vec<usize> = (0..n).collect();
    let base = key(&identity);
    let mut perm = identity;
    // Heap's algorithm over all permutations
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if key(&perm) < base {
                return false;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn spec(name: &str) -> Vec<LogicSpec> {
        vec![LogicSpec::parse(name, "a").unwrap()]
    }

    fn f(text: &str) -> Formula {
        parse_formula(text, &["a"]).unwrap()
    }

    #[test]
    fn two_successors_need_two_states() {
        // a loop plus one edge; the first such frame in bit order is
        // 1 -> 0, 1 -> 1 with p0 only at 0
        let res = bounded_sat(&f("<a>p0 & <a>!p0"), &spec("K"), 4, SearchOptions::default()).unwrap();
        match res.verdict {
            Verdict::Sat { model, witness } => {
                assert_eq!(model.len(), 2);
                assert_eq!(witness, 1);
                assert_eq!(model.relation("a").unwrap().pairs().collect::<Vec<_>>(), vec![(1, 0), (1, 1)]);
                assert_eq!(model.var(0), StateSet::from_iter(2, [0]));
                assert!(eval(&model, &f("<a>p0 & <a>!p0")).unwrap().contains(witness));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn valid_formulas_have_no_small_countermodels() {
        let k5 = bounded_sat(&f("!(<a>p0 -> [a]<a>p0)"), &spec("K5"), 5, SearchOptions::default()).unwrap();
        assert!(matches!(k5.verdict, Verdict::NoModelUpTo(5)));
        let a6 = bounded_countermodel(&f("p0 -> [a]<a^->p0"), &spec("K"), 4, SearchOptions::default()).unwrap();
        assert!(matches!(a6.verdict, Verdict::NoModelUpTo(4)));
        let k3 = bounded_countermodel(&f("<a><a><a>p0 -> <a>p0"), &spec("Km(3)"), 4, SearchOptions::default()).unwrap();
        assert!(matches!(k3.verdict, Verdict::NoModelUpTo(4)));
    }

    #[test]
    fn countermodel_to_reflexivity() {
        let res = bounded_countermodel(&f("<a>p0 -> p0"), &spec("K"), 3, SearchOptions::default()).unwrap();
        match &res.verdict {
            Verdict::Sat { model, .. } => assert_eq!(model.len(), 2),
            other => panic!("{other:?}"),
        }
        let json = res.to_json();
        assert_eq!(json["verdict"], "SAT");
        assert_eq!(json["n_max"], 3);
        assert!(json["states"].is_array());
    }

    fn brute_count(n: usize, conds: &[FrameCondition]) -> u64 {
        (0u64..1 << (n * n))
            .filter(|mask| {
                let mut r = Relation::empty(n);
                for b in 0..n * n {
                    if mask >> b & 1 == 1 {
                        r.insert(b / n, b % n);
                    }
                }
                conds.iter().all(|c| c.holds(&r))
            })
            .count() as u64
    }

    #[test]
    fn frame_counts_match_direct_counting() {
        use FrameCondition::*;
        let sets: &[&[FrameCondition]] = &[
            &[],
            &[Reflexive],
            &[Transitive],
            &[Reflexive, Transitive],
            &[Symmetric],
            &[Serial],
            &[Euclidean],
            &[Equivalence],
            &[MCollapse(3)],
            &[Symmetric, WeaklyTransitive],
            &[Transitive, Euclidean],
        ];
        for n in 1..=3 {
            for conds in sets {
                let map = BTreeMap::from([("a".to_string(), conds.iter().copied().collect())]);
                assert_eq!(count_frames(n, &map), brute_count(n, conds), "{conds:?} at {n}");
            }
            let refl = BTreeMap::from([("a".to_string(), BTreeSet::from([Reflexive]))]);
            assert_eq!(count_frames(n, &refl), 1 << (n * n - n));
        }
    }

    #[test]
    fn budget_aborts_with_partial_coverage() {
        let opts = SearchOptions {
            budget: 100,
            iso_prune: false,
        };
        let err = bounded_sat(&f("<a>p0 & !<a>p0"), &spec("K"), 4, opts).unwrap_err();
        match err {
            DecideError::Budget { at_size, completed, .. } => {
                assert_eq!(at_size, 3);
                assert_eq!(completed, 2);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_frame_conditions_are_rejected() {
        let odd = vec![LogicSpec::parse("K+[]([]p->p)->[]p", "a").unwrap()];
        assert!(matches!(
            bounded_sat(&f("p0"), &odd, 2, SearchOptions::default()),
            Err(DecideError::MissingFrameConditions(_))
        ));
        assert!(matches!(
            bounded_sat(&parse_formula("<b>p0", &["b"]).unwrap(), &spec("K"), 2, SearchOptions::default()),
            Err(DecideError::UncoveredModality(_))
        ));
    }

    #[test]
    fn iso_pruning_agrees_on_verdicts() {
        let pruned = SearchOptions {
            iso_prune: true,
            ..SearchOptions::default()
        };
        for (text, logic) in [("<a>p0 & <a>!p0", "K"), ("!(<a>p0 -> [a]<a>p0)", "K5"), ("<a>p0 & [a][a]!p0", "K4")] {
            let plain = bounded_sat(&f(text), &spec(logic), 4, SearchOptions::default()).unwrap();
            let fast = bounded_sat(&f(text), &spec(logic), 4, pruned).unwrap();
            assert_eq!(plain.is_sat(), fast.is_sat(), "{text}");
            assert!(fast.stats.frames <= plain.stats.frames);
        }
    }
}
