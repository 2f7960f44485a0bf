//! Instance compilation: variables, objective and constraint families.

use std::collections::HashMap;

use super::{
    coalition_joints, complement_index, successor, BuildCtx, Cmp, IlpConstraint, IlpError,
    IlpModel, VarDef, VarKind,
};
use crate::logic::PlanNode;
use crate::model::Ccgs;
use crate::valuation::FeatureSet;

fn coalition_piece(members0: &[usize]) -> String {
    members0
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join("_")
}

fn joint_piece(model: &Ccgs, q: usize, members0: &[usize], joint: &[usize]) -> String {
    members0
        .iter()
        .zip(joint)
        .map(|(&i, &a)| model.actions_of(q, i + 1)[a].clone())
        .collect::<Vec<_>>()
        .join("_")
}

struct Builder {
    vars: Vec<VarDef>,
    name_index: HashMap<String, usize>,
    constraints: Vec<IlpConstraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind) -> Result<usize, IlpError> {
        let idx = self.vars.len();
        if self.name_index.insert(name.clone(), idx).is_some() {
            return Err(IlpError::DuplicateName(name));
        }
        self.vars.push(VarDef { name, kind });
        Ok(idx)
    }

    fn push(&mut self, terms: Vec<(f64, usize)>, cmp: Cmp, rhs: f64, family: u8) {
        self.constraints.push(IlpConstraint {
            terms,
            cmp,
            rhs,
            family,
        });
    }
}

/// Build the dominant-social-law program for `model`, `features` and the
/// bid profile: maximize the sum of feature weights over satisfied initial
/// state bits minus the virtual cost of every forbidden action, subject to
/// constraint families (25)..(59).
pub fn build_dom_sl(
    model: &Ccgs,
    features: &FeatureSet,
    bids: &[f64],
) -> Result<IlpModel, IlpError> {
    let k = model.agent_count();
    if bids.len() != k {
        return Err(IlpError::BidCount {
            got: bids.len(),
            want: k,
        });
    }
    if bids.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return Err(IlpError::BadBid);
    }
    let mut lambda = Vec::with_capacity(k);
    for i in 1..=k {
        lambda.push(model.cost_model(i).virtual_cost(bids[i - 1])?);
    }

    let plan = features.plan(model)?;
    let nodes = plan.nodes.clone();
    let closure_len = plan.len();
    let mut weight_by_fid = vec![0.0f64; closure_len];
    for f in &features.features {
        let fid = plan.index_of(&f.formula).expect("feature is in its plan");
        weight_by_fid[fid] += f.value;
    }

    // coalition registry: quantifier coalitions in fid order, then their
    // complements when missing
    let mut coalitions: Vec<Vec<usize>> = Vec::new();
    let mut register = |c: &Vec<usize>, list: &mut Vec<Vec<usize>>| {
        if !list.iter().any(|x| x == c) {
            list.push(c.clone());
        }
    };
    for node in &nodes {
        if let PlanNode::Next(c, _) | PlanNode::Always(c, _) | PlanNode::Until(c, _, _) = node {
            register(c, &mut coalitions);
        }
    }
    for ci in 0..coalitions.len() {
        let complement: Vec<usize> = (0..k).filter(|i| !coalitions[ci].contains(i)).collect();
        register(&complement, &mut coalitions);
    }

    // s/z/e groups keyed by (tracked formula, quantifier coalition); next
    // tracks its operand, always/until track themselves
    let coal_index = |c: &Vec<usize>, list: &[Vec<usize>]| {
        list.iter().position(|x| x == c).expect("registered")
    };
    let mut groups: Vec<(usize, usize)> = Vec::new(); // (target fid, coal idx)
    let mut group_of_owner: Vec<Option<usize>> = vec![None; closure_len];
    for (fid, node) in nodes.iter().enumerate() {
        let key = match node {
            PlanNode::Next(c, a) => Some((*a, coal_index(c, &coalitions))),
            PlanNode::Always(c, _) | PlanNode::Until(c, _, _) => {
                Some((fid, coal_index(c, &coalitions)))
            }
            _ => None,
        };
        if let Some(key) = key {
            let gi = match groups.iter().position(|g| *g == key) {
                Some(gi) => gi,
                None => {
                    groups.push(key);
                    groups.len() - 1
                }
            };
            group_of_owner[fid] = Some(gi);
        }
    }

    let mut b = Builder {
        vars: Vec::new(),
        name_index: HashMap::new(),
        constraints: Vec::new(),
    };
    let nq = model.state_count();

    // x[q, fid]
    let mut x_idx = vec![vec![0usize; closure_len]; nq];
    for q in 0..nq {
        for fid in 0..closure_len {
            x_idx[q][fid] = b.var(
                format!("x__{}__{}", model.state_name(q), fid),
                VarKind::X { q, fid },
            )?;
        }
    }
    // y[q, agent, action]
    let mut y_idx: Vec<Vec<Vec<usize>>> = vec![Vec::new(); nq];
    for q in 0..nq {
        for i in 0..k {
            let mut row = Vec::new();
            for (act, name) in model.actions_of(q, i + 1).iter().enumerate() {
                row.push(b.var(
                    format!("y__{}__{}__{}", model.state_name(q), i + 1, name),
                    VarKind::Y { q, agent0: i, act },
                )?);
            }
            y_idx[q].push(row);
        }
    }
    // yA[q, coalition, joint]
    let mut ycoal_idx: HashMap<(usize, usize, Vec<usize>), usize> = HashMap::new();
    for q in 0..nq {
        for (ci, members) in coalitions.iter().enumerate() {
            for joint in coalition_joints(model, q, members) {
                let idx = b.var(
                    format!(
                        "yA__{}__{}__{}",
                        model.state_name(q),
                        coalition_piece(members),
                        joint_piece(model, q, members, &joint)
                    ),
                    VarKind::YCoal {
                        q,
                        coal: ci,
                        joint: joint.clone(),
                    },
                )?;
                ycoal_idx.insert((q, ci, joint), idx);
            }
        }
    }
    // s[q, group, m_A, m_Abar]
    let mut s_idx: HashMap<(usize, usize, Vec<usize>, Vec<usize>), usize> = HashMap::new();
    let ctx_for_complement = BuildCtx {
        model: model.clone(),
        plan: plan.clone(),
        weight_by_fid: weight_by_fid.clone(),
        lambda: lambda.clone(),
        fixed_counts: Vec::new(),
        coalitions: coalitions.clone(),
    };
    for q in 0..nq {
        for (gi, &(tfid, ci)) in groups.iter().enumerate() {
            let members = &coalitions[ci];
            let bar = complement_index(&ctx_for_complement, ci);
            let bar_members = &coalitions[bar];
            for ja in coalition_joints(model, q, members) {
                for jb in coalition_joints(model, q, bar_members) {
                    let idx = b.var(
                        format!(
                            "s__{}__{}__{}__{}__{}",
                            model.state_name(q),
                            tfid,
                            coalition_piece(members),
                            joint_piece(model, q, members, &ja),
                            joint_piece(model, q, bar_members, &jb)
                        ),
                        VarKind::S {
                            q,
                            fid: tfid,
                            coal: ci,
                            joint_a: ja.clone(),
                            joint_abar: jb.clone(),
                        },
                    )?;
                    s_idx.insert((q, gi, ja.clone(), jb), idx);
                }
            }
        }
    }
    // z and e [q, group, m_A]
    let mut z_idx: HashMap<(usize, usize, Vec<usize>), usize> = HashMap::new();
    for q in 0..nq {
        for (gi, &(tfid, ci)) in groups.iter().enumerate() {
            let members = &coalitions[ci];
            for ja in coalition_joints(model, q, members) {
                let idx = b.var(
                    format!(
                        "z__{}__{}__{}__{}",
                        model.state_name(q),
                        tfid,
                        coalition_piece(members),
                        joint_piece(model, q, members, &ja)
                    ),
                    VarKind::Z {
                        q,
                        fid: tfid,
                        coal: ci,
                        joint_a: ja.clone(),
                    },
                )?;
                z_idx.insert((q, gi, ja), idx);
            }
        }
    }
    let mut e_idx: HashMap<(usize, usize, Vec<usize>), usize> = HashMap::new();
    for q in 0..nq {
        for (gi, &(tfid, ci)) in groups.iter().enumerate() {
            let members = &coalitions[ci];
            for ja in coalition_joints(model, q, members) {
                let idx = b.var(
                    format!(
                        "e__{}__{}__{}__{}",
                        model.state_name(q),
                        tfid,
                        coalition_piece(members),
                        joint_piece(model, q, members, &ja)
                    ),
                    VarKind::E {
                        q,
                        fid: tfid,
                        coal: ci,
                        joint_a: ja.clone(),
                    },
                )?;
                e_idx.insert((q, gi, ja), idx);
            }
        }
    }
    // r[q, until fid]
    let mut r_idx: HashMap<(usize, usize), usize> = HashMap::new();
    for q in 0..nq {
        for (fid, node) in nodes.iter().enumerate() {
            if matches!(node, PlanNode::Until(..)) {
                let idx = b.var(
                    format!("r__{}__{}", model.state_name(q), fid),
                    VarKind::R { q, fid },
                )?;
                r_idx.insert((q, fid), idx);
            }
        }
    }

    // objective: feature terms then forbidding costs
    let initial = model.initial();
    let mut objective: Vec<(f64, usize)> = Vec::new();
    for (fid, &w) in weight_by_fid.iter().enumerate() {
        if w != 0.0 {
            objective.push((w, x_idx[initial][fid]));
        }
    }
    for q in 0..nq {
        for i in 0..k {
            for &yv in &y_idx[q][i] {
                if lambda[i] != 0.0 {
                    objective.push((-lambda[i], yv));
                }
            }
        }
    }

    // (25) x range
    for q in 0..nq {
        for fid in 0..closure_len {
            b.push(vec![(1.0, x_idx[q][fid])], Cmp::Le, 1.0, 25);
        }
    }
    // (26) y range
    for q in 0..nq {
        for i in 0..k {
            for &yv in &y_idx[q][i] {
                b.push(vec![(1.0, yv)], Cmp::Le, 1.0, 26);
            }
        }
    }
    // (27) at least one action survives per (state, agent)
    for q in 0..nq {
        for i in 0..k {
            let n = y_idx[q][i].len() as f64;
            let terms: Vec<(f64, usize)> = y_idx[q][i].iter().map(|&v| (1.0, v)).collect();
            b.push(terms, Cmp::Le, n - 1.0, 27);
        }
    }
    // (28) yA range
    for q in 0..nq {
        for (ci, members) in coalitions.iter().enumerate() {
            for joint in coalition_joints(model, q, members) {
                b.push(vec![(1.0, ycoal_idx[&(q, ci, joint)])], Cmp::Le, 1.0, 28);
            }
        }
    }
    // (29) yA >= y for each member, (30) yA <= sum of member bits
    for q in 0..nq {
        for (ci, members) in coalitions.iter().enumerate() {
            for joint in coalition_joints(model, q, members) {
                let ya = ycoal_idx[&(q, ci, joint.clone())];
                for (slot, &i) in members.iter().enumerate() {
                    let yv = y_idx[q][i][joint[slot]];
                    b.push(vec![(1.0, ya), (-1.0, yv)], Cmp::Ge, 0.0, 29);
                }
            }
        }
    }
    for q in 0..nq {
        for (ci, members) in coalitions.iter().enumerate() {
            for joint in coalition_joints(model, q, members) {
                let ya = ycoal_idx[&(q, ci, joint.clone())];
                let mut terms = vec![(1.0, ya)];
                for (slot, &i) in members.iter().enumerate() {
                    terms.push((-1.0, y_idx[q][i][joint[slot]]));
                }
                b.push(terms, Cmp::Le, 0.0, 30);
            }
        }
    }
    // (31)..(34) s: forbidden completion or satisfied successor
    for family in 31u8..=34 {
        for q in 0..nq {
            for (gi, &(tfid, ci)) in groups.iter().enumerate() {
                let members = &coalitions[ci];
                let bar = complement_index(&ctx_for_complement, ci);
                let bar_members = &coalitions[bar];
                for ja in coalition_joints(model, q, members) {
                    for jb in coalition_joints(model, q, bar_members) {
                        let s = s_idx[&(q, gi, ja.clone(), jb.clone())];
                        let ybar = ycoal_idx[&(q, bar, jb.clone())];
                        let succ = successor(model, q, members, &ja, &jb);
                        let xs = x_idx[succ][tfid];
                        match family {
                            31 => b.push(vec![(1.0, s)], Cmp::Le, 1.0, 31),
                            32 => b.push(vec![(1.0, s), (-1.0, ybar)], Cmp::Ge, 0.0, 32),
                            33 => b.push(vec![(1.0, s), (-1.0, xs)], Cmp::Ge, 0.0, 33),
                            _ => b.push(
                                vec![(1.0, s), (-1.0, ybar), (-1.0, xs)],
                                Cmp::Le,
                                0.0,
                                34,
                            ),
                        }
                    }
                }
            }
        }
    }
    // (35)..(37) z: conjunction of s over completions
    for family in 35u8..=37 {
        for q in 0..nq {
            for (gi, &(_, ci)) in groups.iter().enumerate() {
                let members = &coalitions[ci];
                let bar = complement_index(&ctx_for_complement, ci);
                let bar_members = &coalitions[bar];
                for ja in coalition_joints(model, q, members) {
                    let z = z_idx[&(q, gi, ja.clone())];
                    match family {
                        35 => b.push(vec![(1.0, z)], Cmp::Le, 1.0, 35),
                        36 => {
                            for jb in coalition_joints(model, q, bar_members) {
                                let s = s_idx[&(q, gi, ja.clone(), jb)];
                                b.push(vec![(1.0, z), (-1.0, s)], Cmp::Le, 0.0, 36);
                            }
                        }
                        _ => {
                            let jbs = coalition_joints(model, q, bar_members);
                            let mut terms = vec![(1.0, z)];
                            for jb in &jbs {
                                terms.push((-1.0, s_idx[&(q, gi, ja.clone(), jb.clone())]));
                            }
                            b.push(terms, Cmp::Ge, 1.0 - jbs.len() as f64, 37);
                        }
                    }
                }
            }
        }
    }
    // (38)(39) pin propositions to the labeling; the truth constant is
    // pinned to one everywhere alongside (38)
    for q in 0..nq {
        for (fid, node) in nodes.iter().enumerate() {
            match node {
                PlanNode::Prop(p) => {
                    if model.label(q).contains(p) {
                        b.push(vec![(1.0, x_idx[q][fid])], Cmp::Eq, 1.0, 38);
                    } else {
                        b.push(vec![(1.0, x_idx[q][fid])], Cmp::Eq, 0.0, 39);
                    }
                }
                PlanNode::True => b.push(vec![(1.0, x_idx[q][fid])], Cmp::Eq, 1.0, 38),
                _ => {}
            }
        }
    }
    // (40) negation
    for q in 0..nq {
        for (fid, node) in nodes.iter().enumerate() {
            if let PlanNode::Not(a) = node {
                b.push(
                    vec![(1.0, x_idx[q][fid]), (1.0, x_idx[q][*a])],
                    Cmp::Eq,
                    1.0,
                    40,
                );
            }
        }
    }
    // (41)..(43) disjunction
    for family in 41u8..=43 {
        for q in 0..nq {
            for (fid, node) in nodes.iter().enumerate() {
                if let PlanNode::Or(a, c) = node {
                    let xo = x_idx[q][fid];
                    match family {
                        41 => b.push(vec![(1.0, xo), (-1.0, x_idx[q][*a])], Cmp::Ge, 0.0, 41),
                        42 => b.push(vec![(1.0, xo), (-1.0, x_idx[q][*c])], Cmp::Ge, 0.0, 42),
                        _ => b.push(
                            vec![(1.0, xo), (-1.0, x_idx[q][*a]), (-1.0, x_idx[q][*c])],
                            Cmp::Le,
                            0.0,
                            43,
                        ),
                    }
                }
            }
        }
    }
    // (44)..(47) e: available and guaranteed
    for family in 44u8..=47 {
        for q in 0..nq {
            for (gi, &(_, ci)) in groups.iter().enumerate() {
                let members = &coalitions[ci];
                for ja in coalition_joints(model, q, members) {
                    let e = e_idx[&(q, gi, ja.clone())];
                    let z = z_idx[&(q, gi, ja.clone())];
                    let ya = ycoal_idx[&(q, ci, ja.clone())];
                    match family {
                        44 => b.push(vec![(1.0, e)], Cmp::Le, 1.0, 44),
                        45 => b.push(vec![(1.0, e), (-1.0, z), (1.0, ya)], Cmp::Ge, 0.0, 45),
                        46 => b.push(vec![(1.0, e), (-1.0, z)], Cmp::Le, 0.0, 46),
                        _ => b.push(vec![(1.0, e), (1.0, ya)], Cmp::Le, 1.0, 47),
                    }
                }
            }
        }
    }
    // (48)(49) next-step truth is an available guaranteed move
    for family in 48u8..=49 {
        for q in 0..nq {
            for (fid, node) in nodes.iter().enumerate() {
                if let PlanNode::Next(c, _) = node {
                    let gi = group_of_owner[fid].unwrap();
                    let xn = x_idx[q][fid];
                    let jas = coalition_joints(model, q, &coalitions[coal_index(c, &coalitions)]);
                    if family == 48 {
                        for ja in &jas {
                            let e = e_idx[&(q, gi, ja.clone())];
                            b.push(vec![(1.0, xn), (-1.0, e)], Cmp::Ge, 0.0, 48);
                        }
                    } else {
                        let mut terms = vec![(1.0, xn)];
                        for ja in &jas {
                            terms.push((-1.0, e_idx[&(q, gi, ja.clone())]));
                        }
                        b.push(terms, Cmp::Le, 0.0, 49);
                    }
                }
            }
        }
    }
    // (50)..(53) r: the until unrolling witness
    for family in 50u8..=53 {
        for q in 0..nq {
            for (fid, node) in nodes.iter().enumerate() {
                if let PlanNode::Until(c, a, _) = node {
                    let gi = group_of_owner[fid].unwrap();
                    let r = r_idx[&(q, fid)];
                    let jas = coalition_joints(model, q, &coalitions[coal_index(c, &coalitions)]);
                    match family {
                        50 => b.push(vec![(1.0, r)], Cmp::Le, 1.0, 50),
                        51 => b.push(vec![(1.0, r), (-1.0, x_idx[q][*a])], Cmp::Le, 0.0, 51),
                        52 => {
                            let mut terms = vec![(1.0, r)];
                            for ja in &jas {
                                terms.push((-1.0, e_idx[&(q, gi, ja.clone())]));
                            }
                            b.push(terms, Cmp::Le, 0.0, 52);
                        }
                        _ => {
                            for ja in &jas {
                                let e = e_idx[&(q, gi, ja.clone())];
                                b.push(
                                    vec![(1.0, r), (-1.0, x_idx[q][*a]), (-1.0, e)],
                                    Cmp::Ge,
                                    -1.0,
                                    53,
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    // (54)..(56) until truth
    for family in 54u8..=56 {
        for q in 0..nq {
            for (fid, node) in nodes.iter().enumerate() {
                if let PlanNode::Until(_, _, chi) = node {
                    let xu = x_idx[q][fid];
                    let xc = x_idx[q][*chi];
                    let r = r_idx[&(q, fid)];
                    match family {
                        54 => b.push(vec![(1.0, xu), (-1.0, xc)], Cmp::Ge, 0.0, 54),
                        55 => b.push(vec![(1.0, xu), (-1.0, r)], Cmp::Ge, 0.0, 55),
                        _ => b.push(vec![(1.0, xu), (-1.0, xc), (-1.0, r)], Cmp::Le, 0.0, 56),
                    }
                }
            }
        }
    }
    // (57)..(59) always truth
    for family in 57u8..=59 {
        for q in 0..nq {
            for (fid, node) in nodes.iter().enumerate() {
                if let PlanNode::Always(c, a) = node {
                    let gi = group_of_owner[fid].unwrap();
                    let xg = x_idx[q][fid];
                    let xa = x_idx[q][*a];
                    let jas = coalition_joints(model, q, &coalitions[coal_index(c, &coalitions)]);
                    match family {
                        57 => b.push(vec![(1.0, xg), (-1.0, xa)], Cmp::Le, 0.0, 57),
                        58 => {
                            let mut terms = vec![(1.0, xg)];
                            for ja in &jas {
                                terms.push((-1.0, e_idx[&(q, gi, ja.clone())]));
                            }
                            b.push(terms, Cmp::Le, 0.0, 58);
                        }
                        _ => {
                            for ja in &jas {
                                let e = e_idx[&(q, gi, ja.clone())];
                                b.push(
                                    vec![(1.0, xg), (-1.0, xa), (-1.0, e)],
                                    Cmp::Ge,
                                    -1.0,
                                    59,
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(IlpModel {
        vars: b.vars,
        name_index: b.name_index,
        objective,
        constraints: b.constraints,
        ctx: BuildCtx {
            model: model.clone(),
            plan,
            weight_by_fid,
            lambda,
            fixed_counts: Vec::new(),
            coalitions,
        },
    })
}

/// [`build_dom_sl`] plus the family-(60) equality fixing agent `agent`
/// (1-based) to exactly `n` restricted actions.
pub fn build_dom_in_sl(
    model: &Ccgs,
    features: &FeatureSet,
    bids: &[f64],
    agent: usize,
    n: usize,
) -> Result<IlpModel, IlpError> {
    let mut m = build_dom_sl(model, features, bids)?;
    m.add_fixed_count(agent, n)?;
    Ok(m)
}
