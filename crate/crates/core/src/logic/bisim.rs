//! Alternating bisimulation between two structures over the same agent set.
//!
//! The relation is computed by refinement from the full product: a pair is
//! dropped when its labels differ or when, for some coalition, one side has
//! a coalition move the other cannot match (every outcome of the matching
//! move must relate back to some outcome of the original move). The check
//! quantifies over all coalitions, which is acceptable at desk scale.

use std::collections::{BTreeMap, BTreeSet};

use super::LogicError;
use crate::model::Ccgs;

/// Outcome sets per coalition move: projection of joint actions onto the
/// coalition -> set of possible successors.
fn moves(model: &Ccgs, q: usize, agents0: &[usize]) -> BTreeMap<Vec<usize>, BTreeSet<usize>> {
    let mut out: BTreeMap<Vec<usize>, BTreeSet<usize>> = BTreeMap::new();
    for (joint, to) in model.transitions_of(q) {
        let key: Vec<usize> = agents0.iter().map(|&i| joint[i]).collect();
        out.entry(key).or_default().insert(*to);
    }
    out
}

/// Every outcome of `mb` has a related outcome in `ma`.
fn covered(
    ma: &BTreeSet<usize>,
    mb: &BTreeSet<usize>,
    related: impl Fn(usize, usize) -> bool,
) -> bool {
    mb.iter().all(|&qb| ma.iter().any(|&qa| related(qa, qb)))
}

/// The greatest alternating bisimulation relation between `a` and `b` that
/// contains the initial pair, or `None` when the structures are not
/// equivalent. Pairs are (state of `a`, state of `b`).
pub fn check_bisimulation(
    a: &Ccgs,
    b: &Ccgs,
) -> Result<Option<BTreeSet<(usize, usize)>>, LogicError> {
    if a.agent_count() != b.agent_count() {
        return Err(LogicError::AgentMismatch(a.agent_count(), b.agent_count()));
    }
    let k = a.agent_count();
    let coalitions: Vec<Vec<usize>> = (0..(1u32 << k))
        .map(|bits| (0..k).filter(|i| bits & (1 << i) != 0).collect())
        .collect();

    // condition 1: equal label sets, compared by name
    let mut relation: BTreeSet<(usize, usize)> = BTreeSet::new();
    for qa in 0..a.state_count() {
        for qb in 0..b.state_count() {
            if a.label_names(qa) == b.label_names(qb) {
                relation.insert((qa, qb));
            }
        }
    }

    // precompute per-coalition move tables
    let moves_a: Vec<Vec<BTreeMap<Vec<usize>, BTreeSet<usize>>>> = (0..a.state_count())
        .map(|q| coalitions.iter().map(|c| moves(a, q, c)).collect())
        .collect();
    let moves_b: Vec<Vec<BTreeMap<Vec<usize>, BTreeSet<usize>>>> = (0..b.state_count())
        .map(|q| coalitions.iter().map(|c| moves(b, q, c)).collect())
        .collect();

    loop {
        let snapshot = relation.clone();
        let related = |qa: usize, qb: usize| snapshot.contains(&(qa, qb));
        relation.retain(|&(qa, qb)| {
            coalitions.iter().enumerate().all(|(ci, _)| {
                let ta = &moves_a[qa][ci];
                let tb = &moves_b[qb][ci];
                // condition 2: every A-move of `a` is matched by an A-move of
                // `b` whose outcomes all relate back
                let fwd = ta
                    .values()
                    .all(|ma| tb.values().any(|mb| covered(ma, mb, related)));
                // condition 3: every A-move of `b` is matched by an A-move of
                // `a` whose outcomes all relate forward
                let bwd = tb.values().all(|mb| {
                    ta.values()
                        .any(|ma| ma.iter().all(|&qa2| mb.iter().any(|&qb2| related(qa2, qb2))))
                });
                fwd && bwd
            })
        });
        if relation == snapshot {
            break;
        }
    }

    if relation.contains(&(a.initial(), b.initial())) {
        Ok(Some(relation))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SocialLaw;

    const EX1: &str = include_str!("../../fixtures/ex1_identity.json");

    fn ex1() -> Ccgs {
        Ccgs::from_json(EX1).unwrap()
    }

    #[test]
    fn structure_is_bisimilar_to_itself() {
        let m = ex1();
        let z = check_bisimulation(&m, &m).unwrap().expect("equivalent");
        for q in 0..m.state_count() {
            assert!(z.contains(&(q, q)));
        }
    }

    #[test]
    fn differently_restricted_structures_are_not_equivalent() {
        let m = ex1();
        let eta2 = SocialLaw::from_entries([(1, "q0", "a"), (1, "q1", "a"), (1, "q3", "w")]);
        let eta3 = SocialLaw::from_entries([(2, "q2", "w"), (1, "q3", "w")]);
        let a = m.apply_law(&eta2).unwrap();
        let b = m.apply_law(&eta3).unwrap();
        assert!(check_bisimulation(&a, &b).unwrap().is_none());
    }

    #[test]
    fn relabeling_a_reachable_state_breaks_equivalence() {
        let m = ex1();
        let mut doc: serde_json::Value = serde_json::from_str(EX1).unwrap();
        doc["labels"]["q4"] = serde_json::json!([]);
        let relabeled = Ccgs::from_json(&doc.to_string()).unwrap();
        assert!(check_bisimulation(&m, &relabeled).unwrap().is_none());
    }

    #[test]
    fn renamed_states_stay_equivalent() {
        let m = ex1();
        let renamed = Ccgs::from_json(&EX1.replace("q4", "err").replace("q3", "s3")).unwrap();
        let z = check_bisimulation(&m, &renamed).unwrap().expect("equivalent");
        assert!(z.contains(&(m.initial(), renamed.initial())));
    }

    #[test]
    fn agent_count_mismatch_is_an_error() {
        let m = ex1();
        let single = r#"{
            "agents": 1,
            "states": ["s"],
            "initial": "s",
            "propositions": [],
            "labels": {},
            "actions": {"s": {"1": ["x"]}},
            "transitions": [{"from": "s", "joint": ["x"], "to": "s"}],
            "costs": {"1": {"dist": "identity_virtual", "point": 1}}
        }"#;
        let other = Ccgs::from_json(single).unwrap();
        assert!(matches!(
            check_bisimulation(&m, &other),
            Err(LogicError::AgentMismatch(2, 1))
        ));
    }
}
