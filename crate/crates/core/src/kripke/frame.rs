use std::fmt;

use crate::bitset::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameCondition {
    Reflexive,
    Transitive,
    Symmetric,
    Serial,
    Euclidean,
    Equivalence,
    /// `x R^m y ⇒ x R y`, `m >= 1`.
    MCollapse(usize),
    /// `x R y ∧ y R z ∧ x ≠ z ⇒ x R z`.
    WeaklyTransitive,
}

impl FrameCondition {
    pub fn holds(self, r: &Relation) -> bool {
        let n = r.size();
        match self {
            FrameCondition::Reflexive => (0..n).all(|x| r.contains(x, x)),
            FrameCondition::Transitive => r.compose(r).is_subset(r),
            FrameCondition::Symmetric => r.converse() == *r,
            FrameCondition::Serial => (0..n).all(|x| !r.successors(x).is_empty()),
            FrameCondition::Euclidean => (0..n).all(|x| {
                let succ = r.successors(x);
                succ.iter().all(|y| succ.is_subset(r.successors(y)))
            }),
            FrameCondition::Equivalence => {
                FrameCondition::Reflexive.holds(r)
                    && FrameCondition::Symmetric.holds(r)
                    && FrameCondition::Transitive.holds(r)
            }
            FrameCondition::MCollapse(m) => {
                assert!(m >= 1, "m_collapse needs m >= 1");
                r.power(m).is_subset(r)
            }
            FrameCondition::WeaklyTransitive => (0..n).all(|x| {
                r.successors(x).iter().all(|y| {
                    r.successors(y)
                        .iter()
                        .all(|z| z == x || r.contains(x, z))
                })
            }),
        }
    }

    pub fn name(self) -> String {
        match self {
            FrameCondition::Reflexive => "reflexive".into(),
            FrameCondition::Transitive => "transitive".into(),
            FrameCondition::Symmetric => "symmetric".into(),
            FrameCondition::Serial => "serial".into(),
            FrameCondition::Euclidean => "euclidean".into(),
            FrameCondition::Equivalence => "equivalence".into(),
            FrameCondition::MCollapse(m) => format!("m_collapse({m})"),
            FrameCondition::WeaklyTransitive => "weakly_transitive".into(),
        }
    }
}

impl fmt::Display for FrameCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
