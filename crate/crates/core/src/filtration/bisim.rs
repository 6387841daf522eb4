use std::collections::BTreeSet;

use super::partition::{bounded_bisimilarity, CharacteristicSpec, Partition, Witness};
use crate::kripke::{eval, KripkeError, Model};
use crate::syntax::{Formula, FormulaSet};

/// Coarsest bisimulation of `m` that respects the variables in `vars`.
///
/// Signature refinement: each round splits blocks by the set of successor
/// blocks per modality, until the block count stops growing.
pub fn bisim_coarsest(m: &Model, vars: &BTreeSet<u32>) -> Result<Partition, KripkeError> {
    let atoms: Vec<Formula> = vars.iter().map(|&v| Formula::var(v)).collect();
    let modalities: Vec<String> = m.alphabet().map(str::to_string).collect();
    let p = bounded_bisimilarity(m, &atoms, &modalities, None)?;
    Ok(p.with_witness(Witness {
        formulas: FormulaSet::new(),
        characteristic: vec![CharacteristicSpec {
            atoms,
            modalities,
            depth: m.len(),
        }],
    }))
}

fn conj(items: Vec<Formula>) -> Formula {
    items
        .into_iter()
        .reduce(Formula::and)
        .unwrap_or_else(Formula::top)
}

fn disj(items: Vec<Formula>) -> Formula {
    items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bot)
}

/// Expands a characteristic witness into explicit formulas, one per class.
///
/// Expansion stops at the round where bounded bisimilarity stabilises, which
/// induces the same equivalence as any deeper round.
pub fn characteristic_formulas(m: &Model, spec: &CharacteristicSpec) -> Result<FormulaSet, KripkeError> {
    let atom_sets = spec
        .atoms
        .iter()
        .map(|a| eval(m, a))
        .collect::<Result<Vec<_>, _>>()?;
    let relations = spec
        .modalities
        .iter()
        .map(|name| m.relation(name))
        .collect::<Result<Vec<_>, _>>()?;

    let literals = |x: usize| -> Formula {
        conj(
            spec.atoms
                .iter()
                .zip(&atom_sets)
                .map(|(a, s)| if s.contains(x) { a.clone() } else { Formula::not(a.clone()) })
                .collect(),
        )
    };

    let mut partition = bounded_bisimilarity(m, &spec.atoms, &[], Some(0))?;
    let mut chars: Vec<Formula> = (0..partition.len())
        .map(|b| literals(partition.representative(b)))
        .collect();
    for depth in 1..=spec.depth {
        let next = bounded_bisimilarity(m, &spec.atoms, &spec.modalities, Some(depth))?;
        if next.len() == partition.len() {
            break;
        }
        let next_chars = (0..next.len())
            .map(|b| {
                let x = next.representative(b);
                let mut parts = vec![literals(x)];
                for (name, r) in spec.modalities.iter().zip(&relations) {
                    let mut classes: Vec<usize> =
                        r.successors(x).iter().map(|y| partition.class_of(y)).collect();
                    classes.sort_unstable();
                    classes.dedup();
                    for &c in &classes {
                        parts.push(Formula::dia(name, chars[c].clone()));
                    }
                    parts.push(Formula::bx(
                        name,
                        disj(classes.iter().map(|&c| chars[c].clone()).collect()),
                    ));
                }
                conj(parts)
            })
            .collect();
        partition = next;
        chars = next_chars;
    }
    Ok(chars.into_iter().collect())
}
