//! Alternating-time temporal logic over game structures: parsing,
//! desugaring, closure computation, fixpoint model checking, and
//! alternating-bisimulation checking.

mod bisim;
mod mc;
mod parser;

pub use bisim::check_bisimulation;
pub use mc::{model_check, model_check_with_stats};
pub use parser::parse_formula;

pub(crate) use mc::{eval_plan, StructureView};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::Ccgs;

/// Coalition: a set of 1-based agent indices; may be empty.
pub type Coalition = BTreeSet<usize>;

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown proposition '{0}'")]
    UnknownProposition(String),
    #[error("coalition member {member} out of range (agents are 1..={agents})")]
    CoalitionOutOfRange { member: usize, agents: usize },
    #[error("agent-count mismatch: {0} vs {1}")]
    AgentMismatch(usize, usize),
}

/// Formula syntax tree. `And`, `Implies` and `Eventually` are surface sugar
/// and disappear under [`Formula::desugar`]; the core connectives are
/// proposition, truth, negation, disjunction, and the three coalition
/// temporal operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Prop(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Coalition, Box<Formula>),
    Always(Coalition, Box<Formula>),
    Eventually(Coalition, Box<Formula>),
    Until(Coalition, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn prop(name: &str) -> Formula {
        Formula::Prop(name.to_string())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn next<I: IntoIterator<Item = usize>>(coalition: I, f: Formula) -> Formula {
        Formula::Next(coalition.into_iter().collect(), Box::new(f))
    }

    pub fn always<I: IntoIterator<Item = usize>>(coalition: I, f: Formula) -> Formula {
        Formula::Always(coalition.into_iter().collect(), Box::new(f))
    }

    pub fn until<I: IntoIterator<Item = usize>>(coalition: I, a: Formula, b: Formula) -> Formula {
        Formula::Until(coalition.into_iter().collect(), Box::new(a), Box::new(b))
    }

    /// Rewrite sugar into the core connectives.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::Prop(p) => Formula::Prop(p.clone()),
            Formula::Not(f) => Formula::not(f.desugar()),
            Formula::Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Formula::And(a, b) => Formula::not(Formula::or(
                Formula::not(a.desugar()),
                Formula::not(b.desugar()),
            )),
            Formula::Implies(a, b) => Formula::or(Formula::not(a.desugar()), b.desugar()),
            Formula::Next(c, f) => Formula::Next(c.clone(), Box::new(f.desugar())),
            Formula::Always(c, f) => Formula::Always(c.clone(), Box::new(f.desugar())),
            Formula::Eventually(c, f) => {
                Formula::Until(c.clone(), Box::new(Formula::True), Box::new(f.desugar()))
            }
            Formula::Until(c, a, b) => {
                Formula::Until(c.clone(), Box::new(a.desugar()), Box::new(b.desugar()))
            }
        }
    }

    pub fn is_core(&self) -> bool {
        match self {
            Formula::True | Formula::Prop(_) => true,
            Formula::Not(f) => f.is_core(),
            Formula::Or(a, b) => a.is_core() && b.is_core(),
            Formula::And(..) | Formula::Implies(..) | Formula::Eventually(..) => false,
            Formula::Next(_, f) | Formula::Always(_, f) => f.is_core(),
            Formula::Until(_, a, b) => a.is_core() && b.is_core(),
        }
    }

    /// Canonical serialization: fully parenthesized, coalition members
    /// sorted ascending and comma-separated. Injective up to structural
    /// equality and re-parseable by the formula grammar.
    pub fn canon(&self) -> String {
        fn coal(c: &Coalition) -> String {
            c.iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
        match self {
            Formula::True => "true".to_string(),
            Formula::Prop(p) => p.clone(),
            Formula::Not(f) => format!("(! {})", f.canon()),
            Formula::Or(a, b) => format!("({} | {})", a.canon(), b.canon()),
            Formula::And(a, b) => format!("({} & {})", a.canon(), b.canon()),
            Formula::Implies(a, b) => format!("({} -> {})", a.canon(), b.canon()),
            Formula::Next(c, f) => format!("(<<{}>> X {})", coal(c), f.canon()),
            Formula::Always(c, f) => format!("(<<{}>> G {})", coal(c), f.canon()),
            Formula::Eventually(c, f) => format!("(<<{}>> F {})", coal(c), f.canon()),
            Formula::Until(c, a, b) => {
                format!("(<<{}>> ({} U {}))", coal(c), a.canon(), b.canon())
            }
        }
    }

    /// Closure of a core formula: the formula plus, recursively, the
    /// closures of its immediate parts; propositions and the truth constant
    /// close onto themselves. Deduplicated, ordered by (size ascending,
    /// canonical form ascending). The length of the closure is the formula's
    /// size.
    pub fn closure(&self) -> Vec<Formula> {
        debug_assert!(self.is_core(), "closure expects a desugared formula");
        let mut acc = BTreeMap::new();
        collect_closure(self, &mut acc);
        let mut items: Vec<(usize, String, Formula)> = acc
            .into_iter()
            .map(|(canon, f)| (closure_len(&f), canon, f))
            .collect();
        items.sort();
        items.into_iter().map(|(_, _, f)| f).collect()
    }

    /// |closure(self)|, the paper-style size of the formula.
    pub fn size(&self) -> usize {
        closure_len(self)
    }

    /// All proposition names mentioned.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Prop(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// All coalitions mentioned in path quantifiers.
    pub fn coalitions(&self) -> BTreeSet<Coalition> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Next(c, _)
            | Formula::Always(c, _)
            | Formula::Eventually(c, _)
            | Formula::Until(c, _, _) => {
                out.insert(c.clone());
            }
            _ => {}
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::True | Formula::Prop(_) => {}
            Formula::Not(a) => a.visit(f),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Next(_, a) | Formula::Always(_, a) | Formula::Eventually(_, a) => a.visit(f),
            Formula::Until(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Replace proposition leaves by formulas. Used by instance generators.
    pub fn substitute_props(&self, map: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::Prop(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            Formula::Not(f) => Formula::not(f.substitute_props(map)),
            Formula::Or(a, b) => Formula::or(a.substitute_props(map), b.substitute_props(map)),
            Formula::And(a, b) => Formula::And(
                Box::new(a.substitute_props(map)),
                Box::new(b.substitute_props(map)),
            ),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.substitute_props(map)),
                Box::new(b.substitute_props(map)),
            ),
            Formula::Next(c, f) => Formula::Next(c.clone(), Box::new(f.substitute_props(map))),
            Formula::Always(c, f) => Formula::Always(c.clone(), Box::new(f.substitute_props(map))),
            Formula::Eventually(c, f) => {
                Formula::Eventually(c.clone(), Box::new(f.substitute_props(map)))
            }
            Formula::Until(c, a, b) => Formula::Until(
                c.clone(),
                Box::new(a.substitute_props(map)),
                Box::new(b.substitute_props(map)),
            ),
        }
    }

    /// Check propositions and coalition members against a structure.
    pub fn validate_against(&self, model: &Ccgs) -> Result<(), LogicError> {
        for p in self.props() {
            if model.prop_index(&p).is_none() {
                return Err(LogicError::UnknownProposition(p));
            }
        }
        for c in self.coalitions() {
            for &member in &c {
                if member == 0 || member > model.agent_count() {
                    return Err(LogicError::CoalitionOutOfRange {
                        member,
                        agents: model.agent_count(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn collect_closure(f: &Formula, acc: &mut BTreeMap<String, Formula>) {
    if acc.insert(f.canon(), f.clone()).is_some() {
        return;
    }
    match f {
        Formula::True | Formula::Prop(_) => {}
        Formula::Not(a) | Formula::Next(_, a) | Formula::Always(_, a) => collect_closure(a, acc),
        Formula::Or(a, b) | Formula::Until(_, a, b) => {
            collect_closure(a, acc);
            collect_closure(b, acc);
        }
        Formula::And(..) | Formula::Implies(..) | Formula::Eventually(..) => {
            unreachable!("closure expects a desugared formula")
        }
    }
}

fn closure_len(f: &Formula) -> usize {
    let mut acc = BTreeMap::new();
    collect_closure(f, &mut acc);
    acc.len()
}

/// One evaluation step per closure member, children first. Shared by the
/// model checker, the valuation, and the exact program solver.
#[derive(Debug, Clone)]
pub(crate) enum PlanNode {
    True,
    Prop(usize),
    Not(usize),
    Or(usize, usize),
    /// Coalition as sorted 0-based agent indices.
    Next(Vec<usize>, usize),
    Always(Vec<usize>, usize),
    Until(Vec<usize>, usize, usize),
}

/// The union closure of a formula family against a fixed structure,
/// flattened into an evaluation order where every child precedes its parent.
#[derive(Debug, Clone)]
pub struct ClosurePlan {
    pub formulas: Vec<Formula>,
    pub(crate) nodes: Vec<PlanNode>,
}

impl ClosurePlan {
    /// Build from desugared formulas. The entry order of `formulas` does not
    /// matter; the plan is in canonical closure order.
    pub fn build(formulas: &[Formula], model: &Ccgs) -> Result<ClosurePlan, LogicError> {
        let mut acc = BTreeMap::new();
        for f in formulas {
            debug_assert!(f.is_core(), "plan expects desugared formulas");
            f.validate_against(model)?;
            collect_closure(f, &mut acc);
        }
        let mut items: Vec<(usize, String, Formula)> = acc
            .into_iter()
            .map(|(canon, f)| (closure_len(&f), canon, f))
            .collect();
        items.sort();
        let index: BTreeMap<String, usize> = items
            .iter()
            .enumerate()
            .map(|(i, (_, canon, _))| (canon.clone(), i))
            .collect();
        let fid = |f: &Formula| index[&f.canon()];
        let coal = |c: &Coalition| -> Vec<usize> { c.iter().map(|a| a - 1).collect() };
        let mut nodes = Vec::with_capacity(items.len());
        for (_, _, f) in &items {
            nodes.push(match f {
                Formula::True => PlanNode::True,
                Formula::Prop(p) => PlanNode::Prop(model.prop_index(p).unwrap()),
                Formula::Not(a) => PlanNode::Not(fid(a)),
                Formula::Or(a, b) => PlanNode::Or(fid(a), fid(b)),
                Formula::Next(c, a) => PlanNode::Next(coal(c), fid(a)),
                Formula::Always(c, a) => PlanNode::Always(coal(c), fid(a)),
                Formula::Until(c, a, b) => PlanNode::Until(coal(c), fid(a), fid(b)),
                _ => unreachable!(),
            });
        }
        Ok(ClosurePlan {
            formulas: items.into_iter().map(|(_, _, f)| f).collect(),
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    /// Index of a formula in the plan, by structural identity.
    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        let canon = f.canon();
        self.formulas.iter().position(|g| g.canon() == canon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desugar_examples() {
        let f = parse_formula("a1 -> <<1>> X b1").unwrap().desugar();
        assert_eq!(f.canon(), "((! a1) | (<<1>> X b1))");
        let f = parse_formula("<<2>> F b2").unwrap().desugar();
        assert_eq!(f.canon(), "(<<2>> (true U b2))");
        let p = Formula::prop("p");
        assert_eq!(p.desugar(), p);
    }

    #[test]
    fn closure_of_proposition_is_singleton() {
        let f = Formula::prop("p");
        assert_eq!(f.closure(), vec![f.clone()]);
        assert_eq!(f.size(), 1);
    }

    #[test]
    fn closure_of_box_formula() {
        let f = parse_formula("<<>> G !eps").unwrap().desugar();
        let cl = f.closure();
        assert_eq!(cl.len(), 3);
        assert_eq!(cl[0].canon(), "eps");
        assert_eq!(cl[1].canon(), "(! eps)");
        assert_eq!(cl[2].canon(), "(<<>> G (! eps))");
    }

    #[test]
    fn closure_of_nested_example_has_eight_members() {
        // !<<1>> G (<<2>> X p1 | <<1,2>> (p2 U p3))
        let f = parse_formula("!<<1>> G (<<2>> X p1 | <<1,2>> (p2 U p3))")
            .unwrap()
            .desugar();
        assert_eq!(f.closure().len(), 8);
        assert_eq!(f.size(), 8);
    }

    #[test]
    fn closure_is_ordered_and_deduplicated() {
        let f = parse_formula("p | !p").unwrap().desugar();
        let cl = f.closure();
        let canons: Vec<String> = cl.iter().map(|g| g.canon()).collect();
        assert_eq!(canons, vec!["p", "(! p)", "(p | (! p))"]);
    }

    #[test]
    fn canon_round_trips_through_parser() {
        let texts = [
            "<<>> G !eps",
            "<<1>> F b1",
            "a1 -> <<1>> X b1",
            "<<1,2>> (p U (q | !r))",
            "p & q | r -> s",
        ];
        for t in texts {
            let f = parse_formula(t).unwrap();
            let c = f.canon();
            let again = parse_formula(&c).unwrap();
            assert_eq!(f, again, "canon of {t} reparses differently: {c}");
            let core = f.desugar();
            let core_again = parse_formula(&core.canon()).unwrap();
            assert_eq!(core, core_again);
        }
    }
}
