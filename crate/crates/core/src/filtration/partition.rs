use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;

use crate::bitset::StateSet;
use crate::kripke::{eval, KripkeError, Model};
use crate::syntax::{substitute, Formula, FormulaSet};

/// The characteristic formulas, up to `depth`, of the points of a model with
/// respect to the truth sets of `atoms` and the relations of `modalities`.
///
/// Agreement on all of them is depth-bounded bisimilarity, so the set is
/// kept symbolic and expanded only on request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicSpec {
    pub atoms: Vec<Formula>,
    pub modalities: Vec<String>,
    pub depth: usize,
}

impl fmt::Display for CharacteristicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.atoms.iter().map(ToString::to_string).collect();
        write!(
            f,
            "characteristic(atoms: {{{}}}; modalities: {{{}}}; depth <= {})",
            atoms.join(", "),
            self.modalities.join(", "),
            self.depth
        )
    }
}

/// A definability witness Δ: the partition is the equivalence induced by
/// `formulas` together with every characteristic formula described in
/// `characteristic`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness {
    pub formulas: FormulaSet,
    pub characteristic: Vec<CharacteristicSpec>,
}

impl Witness {
    pub fn formulas(formulas: FormulaSet) -> Self {
        Witness {
            formulas,
            characteristic: Vec::new(),
        }
    }

    pub fn is_explicit(&self) -> bool {
        self.characteristic.is_empty()
    }

    pub fn union(&self, other: &Witness) -> Witness {
        let mut characteristic = self.characteristic.clone();
        for c in &other.characteristic {
            if !characteristic.contains(c) {
                characteristic.push(c.clone());
            }
        }
        Witness {
            formulas: self.formulas.union(&other.formulas),
            characteristic,
        }
    }

    pub fn substitute(&self, sigma: &BTreeMap<u32, Formula>) -> Witness {
        Witness {
            formulas: self.formulas.iter().map(|f| substitute(f, sigma)).collect(),
            characteristic: self
                .characteristic
                .iter()
                .map(|c| CharacteristicSpec {
                    atoms: c.atoms.iter().map(|f| substitute(f, sigma)).collect(),
                    modalities: c.modalities.clone(),
                    depth: c.depth,
                })
                .collect(),
        }
    }

    /// The equivalence this witness induces in `m`.
    pub fn induced(&self, m: &Model) -> Result<Partition, KripkeError> {
        let mut p = equiv_induced_plain(m, &self.formulas)?;
        for c in &self.characteristic {
            let q = bounded_bisimilarity(m, &c.atoms, &c.modalities, Some(c.depth))?;
            p = p.intersect(&q);
        }
        Ok(p.with_witness(self.clone()))
    }

    /// Modalities mentioned anywhere in the witness.
    pub fn modalities(&self) -> BTreeSet<String> {
        let mut out = self.formulas.atoms();
        for c in &self.characteristic {
            out.extend(c.modalities.iter().cloned());
            for a in &c.atoms {
                out.extend(a.atoms());
            }
        }
        out
    }

    pub fn describe(&self) -> Vec<String> {
        let mut out: Vec<String> = self.formulas.iter().map(ToString::to_string).collect();
        out.extend(self.characteristic.iter().map(ToString::to_string));
        out
    }
}

/// An equivalence on the states of a model, as blocks indexed by block id.
#[derive(Debug, Clone)]
pub struct Partition {
    blocks: Vec<StateSet>,
    class_of: Vec<usize>,
    witness: Option<Witness>,
}

impl PartialEq for Partition {
    /// Same blocks under the same numbering; witnesses are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.class_of == other.class_of
    }
}

impl Partition {
    /// Groups states by `key`; blocks are numbered by their least member.
    pub fn from_key<K: Eq + Hash>(n: usize, key: impl Fn(usize) -> K) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut class_of = Vec::with_capacity(n);
        for x in 0..n {
            let next = ids.len();
            class_of.push(*ids.entry(key(x)).or_insert(next));
        }
        Self::from_canonical(class_of)
    }

    fn from_canonical(class_of: Vec<usize>) -> Self {
        let n = class_of.len();
        let count = class_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![StateSet::empty(n); count];
        for (x, &b) in class_of.iter().enumerate() {
            blocks[b].insert(x);
        }
        Partition {
            blocks,
            class_of,
            witness: None,
        }
    }

    /// Partition with an explicit block numbering; every block must be non-empty.
    pub fn from_class_map(class_of: Vec<usize>, block_count: usize) -> Result<Self, String> {
        let n = class_of.len();
        let mut blocks = vec![StateSet::empty(n); block_count];
        for (x, &b) in class_of.iter().enumerate() {
            if b >= block_count {
                return Err(format!("state {x} mapped to block {b}, only {block_count} blocks"));
            }
            blocks[b].insert(x);
        }
        if let Some(b) = blocks.iter().position(StateSet::is_empty) {
            return Err(format!("block {b} has no states"));
        }
        Ok(Partition {
            blocks,
            class_of,
            witness: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_canonical((0..n).collect())
    }

    pub fn single(n: usize) -> Self {
        Self::from_canonical(vec![0; n])
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn without_witness(mut self) -> Self {
        self.witness = None;
        self
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }

    pub fn blocks(&self) -> &[StateSet] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &StateSet {
        &self.blocks[b]
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn class_map(&self) -> &[usize] {
        &self.class_of
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.class_of.len()
    }

    pub fn representative(&self, b: usize) -> usize {
        self.blocks[b].first().expect("blocks are non-empty")
    }

    pub fn same_class(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.universe() == coarser.universe()
            && self.blocks.iter().all(|b| {
                let rep = b.first().expect("blocks are non-empty");
                b.iter().all(|x| coarser.same_class(x, rep))
            })
    }

    /// Same equivalence, possibly numbered differently.
    pub fn same_blocks(&self, other: &Partition) -> bool {
        self.refines(other) && other.refines(self)
    }

    /// `self ∩ other`, canonically numbered; witnesses are merged.
    pub fn intersect(&self, other: &Partition) -> Partition {
        let p = Partition::from_key(self.universe(), |x| (self.class_of[x], other.class_of[x]));
        match (&self.witness, &other.witness) {
            (Some(a), Some(b)) => p.with_witness(a.union(b)),
            _ => p,
        }
    }

    /// Block `b` as a set of state names, `[x,y]`.
    pub fn block_name(&self, m: &Model, b: usize) -> String {
        let names: Vec<&str> = self.blocks[b].iter().map(|x| m.state_name(x)).collect();
        format!("[{}]", names.join(","))
    }
}

fn equiv_induced_plain(m: &Model, delta: &FormulaSet) -> Result<Partition, KripkeError> {
    let truth: Vec<StateSet> = delta.iter().map(|f| eval(m, f)).collect::<Result<_, _>>()?;
    Ok(Partition::from_key(m.len(), |x| {
        truth.iter().map(|s| s.contains(x)).collect::<Vec<bool>>()
    }))
}

/// `∼_Δ`: states agreeing on every member of Δ. The witness is Δ itself.
pub fn equiv_induced(m: &Model, delta: &FormulaSet) -> Result<Partition, KripkeError> {
    Ok(equiv_induced_plain(m, delta)?.with_witness(Witness::formulas(delta.clone())))
}

/// Bisimilarity bounded by `depth` rounds (unbounded when `None`), starting
/// from agreement on the truth sets of `atoms`.
pub fn bounded_bisimilarity(
    m: &Model,
    atoms: &[Formula],
    modalities: &[String],
    depth: Option<usize>,
) -> Result<Partition, KripkeError> {
    let atoms: FormulaSet = atoms.iter().cloned().collect();
    let mut p = equiv_induced_plain(m, &atoms)?;
    let relations = modalities
        .iter()
        .map(|name| m.relation(name))
        .collect::<Result<Vec<_>, _>>()?;
    let mut round = 0;
    loop {
        if depth.is_some_and(|d| round >= d) {
            return Ok(p);
        }
        let next = Partition::from_key(m.len(), |x| {
            let succ_classes: Vec<Vec<usize>> = relations
                .iter()
                .map(|r| {
                    let mut cs: Vec<usize> = r.successors(x).iter().map(|y| p.class_of(y)).collect();
                    cs.sort_unstable();
                    cs.dedup();
                    cs
                })
                .collect();
            (p.class_of(x), succ_classes)
        });
        round += 1;
        if next.len() == p.len() {
            return Ok(next);
        }
        p = next;
    }
}
