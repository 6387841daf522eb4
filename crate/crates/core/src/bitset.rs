//! Dense bitsets over state indices and relations stored as successor rows.

use std::cmp::Ordering;
use std::fmt;

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// A subset of `{0, .., universe-1}`.
///
/// Ordering compares sets as binary numbers in which state `i` carries weight
/// `2^i`, so `{0} < {1} < {0,1} < {2}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    universe: usize,
    words: Vec<u64>,
}

impl StateSet {
    pub fn empty(universe: usize) -> Self {
        StateSet {
            universe,
            words: vec![0; words_for(universe)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.trim();
        s
    }

    pub fn singleton(universe: usize, x: usize) -> Self {
        let mut s = Self::empty(universe);
        s.insert(x);
        s
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(universe: usize, iter: I) -> Self {
        let mut s = Self::empty(universe);
        for x in iter {
            s.insert(x);
        }
        s
    }

    /// Builds the set whose members are the set bits of `mask`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= WORD, "from_mask needs a universe of at most 64 states");
        let mut s = Self::empty(universe);
        if universe > 0 {
            s.words[0] = mask;
            s.trim();
        }
        s
    }

    fn trim(&mut self) {
        let rem = self.universe % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.universe && self.words[x / WORD] >> (x % WORD) & 1 == 1
    }

    pub fn insert(&mut self, x: usize) -> bool {
        assert!(x < self.universe, "state {x} outside universe {}", self.universe);
        let was = self.contains(x);
        self.words[x / WORD] |= 1 << (x % WORD);
        !was
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let was = self.contains(x);
        if was {
            self.words[x / WORD] &= !(1 << (x % WORD));
        }
        was
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.universe
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * WORD + t)
                }
            })
        })
    }

    pub fn complement(&self) -> Self {
        let mut s = StateSet {
            universe: self.universe,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }

    pub fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Self) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Material implication `!self | other`.
    pub fn implies(&self, other: &Self) -> Self {
        let mut s = StateSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| !a | b)
                .collect(),
        };
        s.trim();
        s
    }
}

impl Ord for StateSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.universe.cmp(&other.universe).then_with(|| {
            for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for StateSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A binary relation on `{0, .., size-1}`, one successor set per state.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: Vec<StateSet>,
}

impl Relation {
    pub fn empty(size: usize) -> Self {
        Relation {
            rows: vec![StateSet::empty(size); size],
        }
    }

    pub fn full(size: usize) -> Self {
        Relation {
            rows: vec![StateSet::full(size); size],
        }
    }

    pub fn identity(size: usize) -> Self {
        Relation {
            rows: (0..size).map(|x| StateSet::singleton(size, x)).collect(),
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(size: usize, pairs: I) -> Self {
        let mut r = Self::empty(size);
        for (x, y) in pairs {
            r.insert(x, y);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows[x].contains(y)
    }

    pub fn insert(&mut self, x: usize, y: usize) -> bool {
        self.rows[x].insert(y)
    }

    pub fn remove(&mut self, x: usize, y: usize) -> bool {
        self.rows[x].remove(y)
    }

    pub fn successors(&self, x: usize) -> &StateSet {
        &self.rows[x]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |y| (x, y)))
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(StateSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(StateSet::is_empty)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    pub fn union(&self, other: &Self) -> Self {
        Relation {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.union(b))
                .collect(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Relation {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.intersection(b))
                .collect(),
        }
    }

    /// `self ∘ other`: pairs `(x, z)` with `x self y` and `y other z`.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.size();
        Relation {
            rows: self
                .rows
                .iter()
                .map(|row| {
                    let mut out = StateSet::empty(n);
                    for y in row.iter() {
                        out.union_with(&other.rows[y]);
                    }
                    out
                })
                .collect(),
        }
    }

    pub fn converse(&self) -> Self {
        let n = self.size();
        let mut r = Self::empty(n);
        for (x, y) in self.pairs() {
            r.insert(y, x);
        }
        r
    }

    /// Least transitive relation containing `self` (Warshall on rows).
    pub fn transitive_closure(&self) -> Self {
        let mut r = self.clone();
        let n = r.size();
        for k in 0..n {
            let row_k = r.rows[k].clone();
            for i in 0..n {
                if r.rows[i].contains(k) {
                    r.rows[i].union_with(&row_k);
                }
            }
        }
        r
    }

    pub fn reflexive_closure(&self) -> Self {
        self.union(&Self::identity(self.size()))
    }

    /// `self^k` for `k >= 1`.
    pub fn power(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut r = self.clone();
        for _ in 1..k {
            r = r.compose(self);
        }
        r
    }

    /// `{x | ∃y. x R y ∧ y ∈ target}`.
    pub fn preimage(&self, target: &StateSet) -> StateSet {
        let n = self.size();
        let mut out = StateSet::empty(n);
        for (x, row) in self.rows.iter().enumerate() {
            if row.intersects(target) {
                out.insert(x);
            }
        }
        out
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}
