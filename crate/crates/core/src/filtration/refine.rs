use std::collections::BTreeMap;

use super::{check_filtration, FiltrationCertificate, FiltrationError, Partition};
use crate::bitset::{Relation, StateSet};
use crate::kripke::Model;

/// Moves a filtration onto a finer definable partition.
///
/// Each finer block `u` sits inside a unique coarse block `uΔ`; relations are
/// pulled back along `u ↦ uΔ` and `u ∈ θ̂'(p)` iff `uΔ ∈ θ̂(p)`. The map is a
/// p-morphism, so truth at `u` equals truth at `uΔ` for every formula.
pub fn refine(
    cert: &FiltrationCertificate,
    finer: &Partition,
) -> Result<FiltrationCertificate, FiltrationError> {
    if finer.witness().is_none() {
        return Err(FiltrationError::MissingWitness);
    }
    if !finer.refines(&cert.partition) {
        return Err(FiltrationError::NotARefinement);
    }
    let image = coarse_image(cert, finer);
    let k = finer.len();

    let mut relations = BTreeMap::new();
    for (name, r) in cert.quotient.relations() {
        let mut out = Relation::empty(k);
        for u in 0..k {
            for v in 0..k {
                if r.contains(image[u], image[v]) {
                    out.insert(u, v);
                }
            }
        }
        relations.insert(name.clone(), out);
    }

    let names: Vec<String> = (0..k).map(|u| finer.block_name(&cert.source, u)).collect();
    let mut quotient = Model::new(names, Vec::<String>::new());
    for (name, r) in relations {
        quotient.set_relation(name, r).expect("sized to the finer partition");
    }
    for (&v, set) in cert.quotient.valuation() {
        let pulled = StateSet::from_iter(k, (0..k).filter(|&u| set.contains(image[u])));
        quotient.set_var(v, pulled);
    }

    let mut out = FiltrationCertificate {
        source: cert.source.clone(),
        gamma: cert.gamma.clone(),
        partition: finer.clone(),
        quotient,
        strategy: format!("{}+refine", cert.strategy),
        detail: cert.detail.clone(),
        report: None,
        logic_check: None,
    };
    out.report = Some(check_filtration(&out)?);
    Ok(out)
}

/// Quotient block of the coarse certificate under each finer block.
pub fn coarse_image(cert: &FiltrationCertificate, finer: &Partition) -> Vec<usize> {
    (0..finer.len())
        .map(|u| cert.partition.class_of(finer.representative(u)))
        .collect()
}
