//! 0/1 integer-program encoding of the dominant-social-law problem.
//!
//! Variables come in seven classes: per-state truth bits `x` for every
//! closure formula, per-action forbidding bits `y`, joint-action forbidding
//! bits `yA` for every quantifier coalition and its complement, and the
//! intermediates `s`, `z`, `e`, `r` that linearize the coalition next-step
//! semantics and the until unrolling. Constraints carry the index of their
//! constraint family (25..=60) as provenance.
//!
//! The exact solver branches only on the `y` bits; all other classes are
//! functions of the chosen law and are derived by evaluating the restricted
//! structure, which also keeps until/always bits at their intended fixpoints
//! (the constraint families alone admit spurious fixpoints on cycles).

mod build;
mod emit;
mod maxwsat;
mod solve;

pub use build::{build_dom_in_sl, build_dom_sl};
pub use emit::emit_lp;
pub use maxwsat::{gen_maxwsat_instance, maxwsat_brute_force, WeightedClause};
pub use solve::{solve_exact, SolveOutcome};

use std::collections::HashMap;

use thiserror::Error;

use crate::distributions::DistError;
use crate::logic::{ClosurePlan, LogicError, PlanNode, StructureView};
use crate::model::{Ccgs, LawMasks, ModelError, SocialLaw};
use crate::valuation::ValuationError;

#[derive(Debug, Error)]
pub enum IlpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("bid profile has {got} entries, model has {want} agents")]
    BidCount { got: usize, want: usize },
    #[error("bids must be nonnegative and finite")]
    BadBid,
    #[error("agent index {0} out of range")]
    BadAgent(usize),
    #[error("generated variable name '{0}' is ambiguous; action names must not contain '__'")]
    DuplicateName(String),
    #[error("max-weight-sat generator is limited to 20 variables, got {0}")]
    TooManyVars(usize),
    #[error("duplicate boolean variable '{0}'")]
    DuplicateVar(String),
    #[error("clause must be propositional over the declared variables: {0}")]
    BadClause(String),
    #[error("reserved name '{0}' cannot be a boolean variable")]
    ReservedVar(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// One linear constraint `sum(coef * var) cmp rhs`, tagged with its
/// constraint-family number.
#[derive(Debug, Clone)]
pub struct IlpConstraint {
    pub terms: Vec<(f64, usize)>,
    pub cmp: Cmp,
    pub rhs: f64,
    pub family: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum VarKind {
    X {
        q: usize,
        fid: usize,
    },
    Y {
        q: usize,
        agent0: usize,
        act: usize,
    },
    YCoal {
        q: usize,
        coal: usize,
        joint: Vec<usize>,
    },
    S {
        q: usize,
        fid: usize,
        coal: usize,
        joint_a: Vec<usize>,
        joint_abar: Vec<usize>,
    },
    Z {
        q: usize,
        fid: usize,
        coal: usize,
        joint_a: Vec<usize>,
    },
    E {
        q: usize,
        fid: usize,
        coal: usize,
        joint_a: Vec<usize>,
    },
    R {
        q: usize,
        fid: usize,
    },
}

#[derive(Debug, Clone)]
pub struct VarDef {
    pub name: String,
    pub(crate) kind: VarKind,
}

#[derive(Debug, Clone)]
pub(crate) struct BuildCtx {
    pub model: Ccgs,
    pub plan: ClosurePlan,
    /// Objective weight per closure formula (feature values accumulated).
    pub weight_by_fid: Vec<f64>,
    /// Virtual cost per agent at the build-time bid profile.
    pub lambda: Vec<f64>,
    /// Stacked fixed-count side constraints (agent0, n), family (60).
    pub fixed_counts: Vec<(usize, usize)>,
    /// Coalition member lists (0-based, sorted): quantifier coalitions then
    /// missing complements, in first-appearance order over the closure.
    pub coalitions: Vec<Vec<usize>>,
}

/// A built integer program plus the instance data the exact solver and the
/// verifier need.
#[derive(Debug, Clone)]
pub struct IlpModel {
    pub(crate) vars: Vec<VarDef>,
    pub(crate) name_index: HashMap<String, usize>,
    /// Maximized linear objective.
    pub(crate) objective: Vec<(f64, usize)>,
    pub(crate) constraints: Vec<IlpConstraint>,
    pub(crate) ctx: BuildCtx,
}

impl IlpModel {
    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[IlpConstraint] {
        &self.constraints
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn var_name(&self, index: usize) -> &str {
        &self.vars[index].name
    }

    /// Closure size of the encoded feature set.
    pub fn closure_len(&self) -> usize {
        self.ctx.plan.len()
    }

    /// The generation bound `39 * k * t * |Q| * l^2` on the constraint count.
    pub fn size_bound(&self) -> f64 {
        let k = self.ctx.model.agent_count() as f64;
        let t = self.ctx.model.transition_count() as f64;
        let q = self.ctx.model.state_count() as f64;
        let l = self.ctx.plan.len() as f64;
        39.0 * k * t * q * l * l
    }

    /// Append the family-(60) equality fixing agent `agent` (1-based) to
    /// exactly `n` restricted actions.
    pub fn add_fixed_count(&mut self, agent: usize, n: usize) -> Result<(), IlpError> {
        if agent == 0 || agent > self.ctx.model.agent_count() {
            return Err(IlpError::BadAgent(agent));
        }
        let agent0 = agent - 1;
        let terms: Vec<(f64, usize)> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v.kind, VarKind::Y { agent0: a, .. } if a == agent0))
            .map(|(idx, _)| (1.0, idx))
            .collect();
        self.constraints.push(IlpConstraint {
            terms,
            cmp: Cmp::Eq,
            rhs: n as f64,
            family: 60,
        });
        self.ctx.fixed_counts.push((agent0, n));
        Ok(())
    }

    /// Evaluate every constraint against a 0/1 assignment.
    pub fn check_feasible(&self, asg: &Assignment) -> bool {
        self.constraints.iter().all(|c| {
            let lhs: f64 = c
                .terms
                .iter()
                .map(|&(coef, v)| coef * asg.values[v] as f64)
                .sum();
            match c.cmp {
                Cmp::Le => lhs <= c.rhs + 1e-9,
                Cmp::Ge => lhs >= c.rhs - 1e-9,
                Cmp::Eq => (lhs - c.rhs).abs() <= 1e-9,
            }
        })
    }

    /// The social law selected by an assignment: the actions whose `y` bit
    /// is one. Validity is guaranteed by the per-state survivor constraint.
    pub fn decode_law(&self, asg: &Assignment) -> SocialLaw {
        SocialLaw::from_masks(&self.ctx.model, &self.decode_masks(asg))
    }

    pub(crate) fn decode_masks(&self, asg: &Assignment) -> LawMasks {
        let mut masks = LawMasks::empty(&self.ctx.model);
        for (idx, v) in self.vars.iter().enumerate() {
            if let VarKind::Y { q, agent0, act } = v.kind {
                if asg.values[idx] == 1 {
                    masks.0[q][agent0] |= 1 << act;
                }
            }
        }
        masks
    }

    pub(crate) fn model(&self) -> &Ccgs {
        &self.ctx.model
    }
}

/// A complete 0/1 assignment for an [`IlpModel`], with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub values: Vec<u8>,
    pub objective: f64,
}

impl Assignment {
    pub fn value_of(&self, model: &IlpModel, name: &str) -> Option<u8> {
        model.var_index(name).map(|i| self.values[i])
    }
}

/// Check an assignment against the intended semantics: every `x` bit must
/// equal the truth of its formula in the restricted structure, and the
/// derived classes (`yA`, `s`, `z`, `e`, `r`) must satisfy their
/// characterizations (disjunction over members, forbidden-or-satisfied
/// completions, guaranteed next-step, surviving guaranteed next-step, and
/// the until unrolling witness).
pub fn verify_assignment(model: &IlpModel, asg: &Assignment) -> bool {
    let ctx = &model.ctx;
    let masks = model.decode_masks(asg);
    let view = StructureView::restricted(&ctx.model, &masks);
    let sat = crate::logic::eval_plan(view, &ctx.plan);

    let y_of = |q: usize, agent0: usize, act: usize| masks.0[q][agent0] & (1 << act) != 0;
    let ycoal_of = |q: usize, coal: usize, joint: &[usize]| {
        ctx.coalitions[coal]
            .iter()
            .zip(joint)
            .any(|(&i, &a)| y_of(q, i, a))
    };
    let z_of = |q: usize, fid: usize, coal: usize, joint_a: &[usize]| {
        let coal_bar = complement_index(ctx, coal);
        coalition_joints(&ctx.model, q, &ctx.coalitions[coal_bar])
            .into_iter()
            .all(|jb| {
                ycoal_of(q, coal_bar, &jb) || {
                    let succ = successor(&ctx.model, q, &ctx.coalitions[coal], joint_a, &jb);
                    sat[fid][succ]
                }
            })
    };

    for (idx, v) in model.vars.iter().enumerate() {
        let expect = match &v.kind {
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
                let coal_bar = complement_index(ctx, *coal);
                ycoal_of(*q, coal_bar, joint_abar) || {
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
                let (coal_members, psi_fid) = match &ctx.plan.nodes[*fid] {
                    PlanNode::Until(c, a, _) => (c.clone(), *a),
                    _ => unreachable!("r variables exist only for until formulas"),
                };
                let coal = ctx
                    .coalitions
                    .iter()
                    .position(|c| *c == coal_members)
                    .expect("quantifier coalition is registered");
                sat[psi_fid][*q]
                    && coalition_joints(&ctx.model, *q, &coal_members)
                        .into_iter()
                        .any(|ja| !ycoal_of(*q, coal, &ja) && z_of(*q, *fid, coal, &ja))
            }
        };
        if (asg.values[idx] == 1) != expect {
            return false;
        }
    }
    true
}

pub(crate) fn complement_index(ctx: &BuildCtx, coal: usize) -> usize {
    let members = &ctx.coalitions[coal];
    let complement: Vec<usize> = (0..ctx.model.agent_count())
        .filter(|i| !members.contains(i))
        .collect();
    ctx.coalitions
        .iter()
        .position(|c| *c == complement)
        .expect("complement coalition is registered")
}

/// All joint actions of a coalition (0-based sorted members) at `q`, drawn
/// from the base action sets, in lexicographic product order.
pub(crate) fn coalition_joints(model: &Ccgs, q: usize, members0: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &i in members0 {
        let n = model.actions_of(q, i + 1).len();
        let mut next = Vec::with_capacity(out.len() * n);
        for prefix in &out {
            for a in 0..n {
                let mut j = prefix.clone();
                j.push(a);
                next.push(j);
            }
        }
        out = next;
    }
    out
}

/// Successor under the full joint action assembled from a coalition action
/// and a complement action.
pub(crate) fn successor(
    model: &Ccgs,
    q: usize,
    members0: &[usize],
    joint_a: &[usize],
    joint_abar: &[usize],
) -> usize {
    let k = model.agent_count();
    let mut full = vec![usize::MAX; k];
    for (slot, &i) in members0.iter().enumerate() {
        full[i] = joint_a[slot];
    }
    let mut slot = 0;
    for (i, entry) in full.iter_mut().enumerate() {
        if *entry == usize::MAX {
            *entry = joint_abar[slot];
            slot += 1;
            let _ = i;
        }
    }
    model
        .transitions_of(q)
        .iter()
        .find(|(joint, _)| *joint == full)
        .map(|(_, to)| *to)
        .expect("transition function is total")
}
