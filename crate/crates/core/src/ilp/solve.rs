//! Exact desk-scale solving.
//!
//! Search branches over the forbidden subset of each (state, agent) slot;
//! the `x/s/z/e/r` classes are functions of the chosen law, so every leaf is
//! scored by evaluating the closure on the restricted structure. Branches
//! are pruned against the remaining objective bound and against fixed-count
//! side constraints. Ties fall to fewer total restrictions, then to the
//! lexicographically smallest forbidding vector, so the result is unique.

use super::{
    coalition_joints, complement_index, successor, Assignment, IlpError, IlpModel, VarKind,
};
use crate::logic::{eval_plan, PlanNode, StructureView};
use crate::model::LawMasks;

/// Result of the exact solver.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Optimal(Assignment),
    Infeasible,
}

impl SolveOutcome {
    pub fn optimal(self) -> Option<Assignment> {
        match self {
            SolveOutcome::Optimal(a) => Some(a),
            SolveOutcome::Infeasible => None,
        }
    }
}

struct Search<'a> {
    m: &'a IlpModel,
    slots: Vec<(usize, usize, usize)>, // (state, agent0, action count)
    /// restrictable capacity per agent in slots[i..]
    cap_after: Vec<Vec<usize>>,
    /// fixed count per agent, usize::MAX when free
    fixed: Vec<usize>,
    total_weight: f64,
    best: Option<Leaf>,
}

struct Leaf {
    masks: LawMasks,
    g: f64,
    total: usize,
    bits: Vec<u8>,
}

impl<'a> Search<'a> {
    fn leaf_value(&self, masks: &LawMasks, counts: &[usize]) -> f64 {
        let ctx = &self.m.ctx;
        let sat = eval_plan(StructureView::restricted(&ctx.model, masks), &ctx.plan);
        let q0 = ctx.model.initial();
        let mut g = 0.0;
        for (fid, &w) in ctx.weight_by_fid.iter().enumerate() {
            if sat[fid][q0] {
                g += w;
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            g -= c as f64 * ctx.lambda[i];
        }
        g
    }

    fn dfs(&mut self, slot: usize, masks: &mut LawMasks, counts: &mut Vec<usize>) {
        let k = self.m.ctx.model.agent_count();
        // fixed-count feasibility
        for i in 0..k {
            if self.fixed[i] != usize::MAX {
                if counts[i] > self.fixed[i] {
                    return;
                }
                if counts[i] + self.cap_after[i][slot] < self.fixed[i] {
                    return;
                }
            }
        }
        // objective bound: all features satisfied, committed cost only grows
        if let Some(best) = &self.best {
            let mut bound = self.total_weight;
            for i in 0..k {
                let floor = if self.fixed[i] != usize::MAX {
                    self.fixed[i]
                } else {
                    counts[i]
                };
                bound -= floor as f64 * self.m.ctx.lambda[i];
            }
            if bound < best.g {
                return;
            }
        }
        if slot == self.slots.len() {
            for i in 0..k {
                if self.fixed[i] != usize::MAX && counts[i] != self.fixed[i] {
                    return;
                }
            }
            let g = self.leaf_value(masks, counts);
            let total: usize = counts.iter().sum();
            let better = match &self.best {
                None => true,
                Some(best) => {
                    if g != best.g {
                        g > best.g
                    } else if total != best.total {
                        total < best.total
                    } else {
                        masks.lex_bits(&self.m.ctx.model) < best.bits
                    }
                }
            };
            if better {
                self.best = Some(Leaf {
                    masks: masks.clone(),
                    g,
                    total,
                    bits: masks.lex_bits(&self.m.ctx.model),
                });
            }
            return;
        }
        let (q, agent0, n) = self.slots[slot];
        let full = (1u32 << n) - 1;
        for mask in 0..full {
            masks.0[q][agent0] = mask;
            counts[agent0] += mask.count_ones() as usize;
            self.dfs(slot + 1, masks, counts);
            counts[agent0] -= mask.count_ones() as usize;
        }
        masks.0[q][agent0] = 0;
    }
}

/// Optimal assignment of the program, or `Infeasible` when the fixed-count
/// constraints admit no law.
pub fn solve_exact(m: &IlpModel) -> Result<SolveOutcome, IlpError> {
    let model = &m.ctx.model;
    let k = model.agent_count();
    let mut fixed = vec![usize::MAX; k];
    for &(agent0, n) in &m.ctx.fixed_counts {
        if fixed[agent0] != usize::MAX && fixed[agent0] != n {
            return Ok(SolveOutcome::Infeasible);
        }
        fixed[agent0] = n;
    }

    let mut slots = Vec::new();
    for q in 0..model.state_count() {
        for i in 0..k {
            slots.push((q, i, model.actions_of(q, i + 1).len()));
        }
    }
    let mut cap_after = vec![vec![0usize; slots.len() + 1]; k];
    for s in (0..slots.len()).rev() {
        let (_, agent0, n) = slots[s];
        for (i, cap) in cap_after.iter_mut().enumerate() {
            cap[s] = cap[s + 1] + if i == agent0 { n - 1 } else { 0 };
        }
    }

    let mut search = Search {
        m,
        slots,
        cap_after,
        fixed,
        total_weight: m.ctx.weight_by_fid.iter().sum(),
        best: None,
    };
    let mut masks = LawMasks::empty(model);
    let mut counts = vec![0usize; k];
    search.dfs(0, &mut masks, &mut counts);

    let Some(best) = search.best else {
        return Ok(SolveOutcome::Infeasible);
    };
    Ok(SolveOutcome::Optimal(derive_assignment(m, &best.masks)))
}

/// Complete variable assignment induced by a law: `y` from the masks, `x`
/// from model checking the restricted structure, the remaining classes from
/// their characterizations.
pub(crate) fn derive_assignment(m: &IlpModel, masks: &LawMasks) -> Assignment {
    let ctx = &m.ctx;
    let sat = eval_plan(StructureView::restricted(&ctx.model, masks), &ctx.plan);

    let y_of = |q: usize, agent0: usize, act: usize| masks.0[q][agent0] & (1 << act) != 0;
    let ycoal_of = |q: usize, coal: usize, joint: &[usize]| {
        ctx.coalitions[coal]
            .iter()
            .zip(joint)
            .any(|(&i, &a)| y_of(q, i, a))
    };
    let z_of = |q: usize, fid: usize, coal: usize, joint_a: &[usize]| {
        let bar = complement_index(ctx, coal);
        coalition_joints(&ctx.model, q, &ctx.coalitions[bar])
            .into_iter()
            .all(|jb| {
                ycoal_of(q, bar, &jb) || {
                    let succ = successor(&ctx.model, q, &ctx.coalitions[coal], joint_a, &jb);
                    sat[fid][succ]
                }
            })
    };

    let values: Vec<u8> = m
        .vars
        .iter()
        .map(|v| {
            let bit = match &v.kind {
                VarKind::X { q, fid } => sat[*fid][*q],
                VarKind::Y { q, agent0, act } => y_of(*q, *agent0, *act),
                VarKind::YCoal { q, coal, joint } => ycoal_of(*q, *coal, joint),
                VarKind::S {
                    q,
                    fid,
                    coal,
                    joint_a,
                    joint_abar,
                } => {
                    let bar = complement_index(ctx, *coal);
                    ycoal_of(*q, bar, joint_abar) || {
                        let succ =
                            successor(&ctx.model, *q, &ctx.coalitions[*coal], joint_a, joint_abar);
                        sat[*fid][succ]
                    }
                }
                VarKind::Z { q, fid, coal, joint_a } => z_of(*q, *fid, *coal, joint_a),
                VarKind::E { q, fid, coal, joint_a } => {
                    !ycoal_of(*q, *coal, joint_a) && z_of(*q, *fid, *coal, joint_a)
                }
                VarKind::R { q, fid } => {
                    let (members, psi) = match &ctx.plan.nodes[*fid] {
                        PlanNode::Until(c, a, _) => (c.clone(), *a),
                        _ => unreachable!(),
                    };
                    let coal = ctx
                        .coalitions
                        .iter()
                        .position(|c| *c == members)
                        .expect("registered");
                    sat[psi][*q]
                        && coalition_joints(&ctx.model, *q, &members)
                            .into_iter()
                            .any(|ja| !ycoal_of(*q, coal, &ja) && z_of(*q, *fid, coal, &ja))
                }
            };
            bit as u8
        })
        .collect();

    let q0 = ctx.model.initial();
    let mut objective = 0.0;
    for (fid, &w) in ctx.weight_by_fid.iter().enumerate() {
        if sat[fid][q0] {
            objective += w;
        }
    }
    for (i, &lam) in ctx.lambda.iter().enumerate() {
        let count: usize = (0..ctx.model.state_count())
            .map(|q| masks.0[q][i].count_ones() as usize)
            .sum();
        objective -= count as f64 * lam;
    }
    Assignment { values, objective }
}
