//! Fixpoint model checking.
//!
//! Satisfaction sets are computed by structural recursion over the closure:
//! `<<A>> X phi` is the coalition pre-image of `phi`'s set, `<<A>> G phi` the
//! greatest fixpoint of `X -> sat(phi) /\ Pre_A(X)`, and `<<A>> (phi U psi)`
//! the least fixpoint of `X -> sat(psi) \/ (sat(phi) /\ Pre_A(X))`. A state
//! belongs to `Pre_A(X)` when the coalition has a joint action whose every
//! completion by the other agents lands in `X`.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use super::{ClosurePlan, Formula, LogicError, PlanNode};
use crate::model::{Ccgs, LawMasks};

/// A structure, optionally narrowed by forbidden-action masks. Iteration
/// order over surviving joint actions follows the base structure's canonical
/// transition order.
#[derive(Clone, Copy)]
pub(crate) struct StructureView<'a> {
    pub model: &'a Ccgs,
    pub forbidden: Option<&'a LawMasks>,
}

impl<'a> StructureView<'a> {
    pub fn full(model: &'a Ccgs) -> Self {
        StructureView {
            model,
            forbidden: None,
        }
    }

    pub fn restricted(model: &'a Ccgs, masks: &'a LawMasks) -> Self {
        StructureView {
            model,
            forbidden: Some(masks),
        }
    }

    fn joint_survives(&self, q: usize, joint: &[usize]) -> bool {
        match self.forbidden {
            None => true,
            Some(masks) => joint
                .iter()
                .enumerate()
                .all(|(i, &a)| masks.0[q][i] & (1 << a) == 0),
        }
    }

    /// Surviving transitions of `q`.
    pub fn joints(&self, q: usize) -> impl Iterator<Item = (&'a [usize], usize)> + '_ {
        self.model
            .transitions_of(q)
            .iter()
            .filter(move |(joint, _)| self.joint_survives(q, joint))
            .map(|(joint, to)| (joint.as_slice(), *to))
    }

    /// Does some action of every agent survive at every state? True by
    /// construction for masks produced from validated laws.
    pub fn is_proper(&self) -> bool {
        let Some(masks) = self.forbidden else {
            return true;
        };
        (0..self.model.state_count()).all(|q| {
            (1..=self.model.agent_count()).all(|i| {
                (masks.0[q][i - 1].count_ones() as usize) < self.model.actions_of(q, i).len()
            })
        })
    }
}

/// `Pre_A` restricted to one state: does coalition `agents0` (0-based,
/// sorted) have a joint action at `q` whose every surviving completion leads
/// into `target`?
pub(crate) fn pre_at(view: StructureView<'_>, q: usize, agents0: &[usize], target: &[bool]) -> bool {
    // group surviving joint actions by their projection onto the coalition
    let mut groups: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
    for (joint, to) in view.joints(q) {
        let key: Vec<usize> = agents0.iter().map(|&i| joint[i]).collect();
        let entry = groups.entry(key).or_insert(true);
        *entry = *entry && target[to];
    }
    groups.values().any(|&ok| ok)
}

fn eval_node(
    view: StructureView<'_>,
    node: &PlanNode,
    sat: &[Vec<bool>],
    iterations: &mut usize,
) -> Vec<bool> {
    let n = view.model.state_count();
    match node {
        PlanNode::True => vec![true; n],
        PlanNode::Prop(p) => (0..n).map(|q| view.model.label(q).contains(p)).collect(),
        PlanNode::Not(a) => sat[*a].iter().map(|&b| !b).collect(),
        PlanNode::Or(a, b) => (0..n).map(|q| sat[*a][q] || sat[*b][q]).collect(),
        PlanNode::Next(coal, a) => (0..n).map(|q| pre_at(view, q, coal, &sat[*a])).collect(),
        PlanNode::Always(coal, a) => {
            // greatest fixpoint from the full state set
            let mut x = vec![true; n];
            loop {
                *iterations += 1;
                let next: Vec<bool> = (0..n)
                    .map(|q| sat[*a][q] && pre_at(view, q, coal, &x))
                    .collect();
                if next == x {
                    *iterations -= 1; // the stabilizing pass is not a step
                    return x;
                }
                x = next;
            }
        }
        PlanNode::Until(coal, a, b) => {
            // least fixpoint from the empty set
            let mut x = vec![false; n];
            loop {
                *iterations += 1;
                let next: Vec<bool> = (0..n)
                    .map(|q| sat[*b][q] || (sat[*a][q] && pre_at(view, q, coal, &x)))
                    .collect();
                if next == x {
                    *iterations -= 1;
                    return x;
                }
                x = next;
            }
        }
    }
}

/// Evaluate every closure member over the view. Children precede parents in
/// the plan, so a single pass suffices. Returns one satisfaction vector per
/// plan entry; the second component is the largest number of strict fixpoint
/// steps any single temporal operator needed.
pub(crate) fn eval_plan_with_stats(
    view: StructureView<'_>,
    plan: &ClosurePlan,
) -> (Vec<Vec<bool>>, usize) {
    let mut sat: Vec<Vec<bool>> = Vec::with_capacity(plan.nodes.len());
    let mut worst = 0usize;
    for node in &plan.nodes {
        let mut iterations = 0usize;
        let v = eval_node(view, node, &sat, &mut iterations);
        worst = worst.max(iterations);
        sat.push(v);
    }
    (sat, worst)
}

pub(crate) fn eval_plan(view: StructureView<'_>, plan: &ClosurePlan) -> Vec<Vec<bool>> {
    eval_plan_with_stats(view, plan).0
}

/// Exact satisfaction set of `formula` (desugared internally) as state
/// indices of `model`.
pub fn model_check(model: &Ccgs, formula: &Formula) -> Result<BTreeSet<usize>, LogicError> {
    model_check_with_stats(model, formula).map(|(s, _)| s)
}

/// As [`model_check`], also reporting the largest number of strict fixpoint
/// steps used by any temporal operator (bounded by the state count).
pub fn model_check_with_stats(
    model: &Ccgs,
    formula: &Formula,
) -> Result<(BTreeSet<usize>, usize), LogicError> {
    let core = formula.desugar();
    let plan = ClosurePlan::build(std::slice::from_ref(&core), model)?;
    let (sat, worst) = eval_plan_with_stats(StructureView::full(model), &plan);
    let fid = plan.index_of(&core).expect("root formula is in its own closure");
    Ok((
        sat[fid]
            .iter()
            .enumerate()
            .filter_map(|(q, &b)| b.then_some(q))
            .collect(),
        worst,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::model::SocialLaw;

    const EX1: &str = include_str!("../../fixtures/ex1_identity.json");

    fn ex1() -> Ccgs {
        Ccgs::from_json(EX1).unwrap()
    }

    fn check(model: &Ccgs, text: &str) -> BTreeSet<usize> {
        model_check(model, &parse_formula(text).unwrap()).unwrap()
    }

    #[test]
    fn truth_holds_everywhere() {
        let m = ex1();
        assert_eq!(check(&m, "true").len(), m.state_count());
        assert!(check(&m, "false").is_empty());
    }

    #[test]
    fn safety_feature_fails_without_law_and_holds_under_eta3() {
        let m = ex1();
        assert!(!check(&m, "<<>> G !eps").contains(&m.initial()));
        let eta3 = SocialLaw::from_entries([(2, "q2", "w"), (1, "q3", "w")]);
        let r = m.apply_law(&eta3).unwrap();
        let sat = check(&r, "<<>> G !eps");
        assert!(sat.contains(&r.initial()));
        assert_eq!(sat.len(), 4); // q4 itself is the only violating state
    }

    #[test]
    fn next_operator_respects_forced_moves() {
        let m = ex1();
        // at q0 agent 1 can force the control state with action a
        let sat = check(&m, "<<1>> X b1");
        assert!(sat.contains(&0));
        assert!(!sat.contains(&1));
    }

    #[test]
    fn negation_is_complement_and_or_is_union() {
        let m = ex1();
        for text in ["<<1>> F b1", "a1 | <<2>> X b2", "<<>> G (a1 -> <<1>> X b1)"] {
            let f = parse_formula(text).unwrap();
            let sat = model_check(&m, &f).unwrap();
            let neg = model_check(&m, &Formula::not(f.clone())).unwrap();
            let all: BTreeSet<usize> = (0..m.state_count()).collect();
            assert_eq!(
                sat.union(&neg).cloned().collect::<BTreeSet<_>>(),
                all,
                "{text}"
            );
            assert!(sat.intersection(&neg).next().is_none(), "{text}");
            let g = parse_formula("eps").unwrap();
            let or = model_check(&m, &Formula::or(f.clone(), g.clone())).unwrap();
            let gs = model_check(&m, &g).unwrap();
            assert_eq!(or, sat.union(&gs).cloned().collect(), "{text}");
        }
    }

    #[test]
    fn always_subset_until_superset() {
        let m = ex1();
        for (a, b) in [("<<1>> G b1", "b1"), ("<<>> G !eps", "!eps")] {
            let box_set = check(&m, a);
            let body = check(&m, b);
            assert!(box_set.is_subset(&body));
        }
        let until = check(&m, "<<1,2>> (true U b2)");
        let target = check(&m, "b2");
        assert!(target.is_subset(&until));
    }

    #[test]
    fn fixpoints_converge_within_state_count() {
        let m = ex1();
        for text in [
            "<<>> G !eps",
            "<<1>> F b1",
            "<<>> G <<2>> F b2",
            "<<1,2>> (a1 U b2)",
        ] {
            let (_, worst) = model_check_with_stats(&m, &parse_formula(text).unwrap()).unwrap();
            assert!(
                worst <= m.state_count(),
                "{text}: {worst} steps for {} states",
                m.state_count()
            );
        }
    }

    /// Independent route for the next-step operator: enumerate coalition
    /// actions and completions directly from the transition table.
    fn next_brute(model: &Ccgs, coalition: &[usize], target: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for q in 0..model.state_count() {
            let mut by_proj: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
            for (joint, to) in model.transitions_of(q) {
                let key: Vec<usize> = coalition.iter().map(|&i| joint[i - 1]).collect();
                by_proj.entry(key).or_default().push(*to);
            }
            if by_proj
                .values()
                .any(|succs| succs.iter().all(|s| target.contains(s)))
            {
                out.insert(q);
            }
        }
        out
    }

    #[test]
    fn next_matches_brute_force_enumeration() {
        let m = ex1();
        let coalitions: [&[usize]; 4] = [&[], &[1], &[2], &[1, 2]];
        for target_text in ["b1", "b2", "a1 | a2", "!eps"] {
            let target = check(&m, target_text);
            for coalition in coalitions {
                let f = Formula::next(
                    coalition.iter().copied(),
                    parse_formula(target_text).unwrap(),
                );
                let via_mc = model_check(&m, &f).unwrap();
                assert_eq!(via_mc, next_brute(&m, coalition, &target), "{target_text}");
            }
        }
    }

    #[test]
    fn unknown_proposition_and_bad_coalition_error() {
        let m = ex1();
        assert!(matches!(
            model_check(&m, &parse_formula("nope").unwrap()),
            Err(LogicError::UnknownProposition(_))
        ));
        assert!(matches!(
            model_check(&m, &parse_formula("<<3>> X a1").unwrap()),
            Err(LogicError::CoalitionOutOfRange { member: 3, .. })
        ));
    }
}
