//! Cost-aware concurrent game structures and social laws.
//!
//! A structure couples a concurrent game (states, per-agent action sets, a
//! total transition function over joint actions) with one cost prior per
//! agent. A social law removes, per agent and state, a proper subset of the
//! available actions; implementing it deletes the forbidden actions and every
//! transition that uses them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::CostDistribution;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("agent count must be positive")]
    NoAgents,
    #[error("state list is empty")]
    NoStates,
    #[error("duplicate state '{0}'")]
    DuplicateState(String),
    #[error("duplicate proposition '{0}'")]
    DuplicateProposition(String),
    #[error("unknown state '{0}'")]
    UnknownState(String),
    #[error("unknown proposition '{0}' in label of state '{1}'")]
    UnknownProposition(String, String),
    #[error("unknown agent index '{0}' (agents are 1..={1})")]
    UnknownAgent(String, usize),
    #[error("empty action set for agent {agent} at state {state}")]
    EmptyActionSet { agent: usize, state: String },
    #[error("duplicate action '{action}' for agent {agent} at state {state}")]
    DuplicateAction {
        agent: usize,
        state: String,
        action: String,
    },
    #[error("more than 32 actions for agent {agent} at state {state}")]
    TooManyActions { agent: usize, state: String },
    #[error("missing action table for state '{0}'")]
    MissingActions(String),
    #[error("unknown action '{action}' for agent {agent} at state {state}")]
    UnknownAction {
        agent: usize,
        state: String,
        action: String,
    },
    #[error("joint action for state '{state}' has {got} entries, expected {expected}")]
    JointLength {
        state: String,
        got: usize,
        expected: usize,
    },
    #[error("duplicate transition for state '{state}' and joint action ({joint})")]
    DuplicateTransition { state: String, joint: String },
    #[error("non-total transition function: state '{state}' has no successor for joint action ({joint})")]
    NonTotal { state: String, joint: String },
    #[error("missing cost distribution for agent {0}")]
    MissingCost(usize),
    #[error("malformed distribution for agent {agent}: {reason}")]
    BadDistribution { agent: usize, reason: String },
    #[error("law restricts unknown agent {0}")]
    LawUnknownAgent(usize),
    #[error("law names unknown state '{0}'")]
    LawUnknownState(String),
    #[error("law forbids unknown action '{action}' for agent {agent} at state {state}")]
    LawUnknownAction {
        agent: usize,
        state: String,
        action: String,
    },
    #[error("restriction empties the action set of agent {agent} at state {state}")]
    LawEmptiesActions { agent: usize, state: String },
}

/// Raw model document as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelDoc {
    agents: usize,
    states: Vec<String>,
    initial: String,
    propositions: Vec<String>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<String>>,
    actions: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    transitions: Vec<TransitionDoc>,
    costs: BTreeMap<String, CostDistribution>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TransitionDoc {
    from: String,
    joint: Vec<String>,
    to: String,
}

/// A cost-aware concurrent game structure.
///
/// States, propositions and actions keep the order of the source document;
/// that order is the canonical one used for enumeration and tie-breaking.
/// Joint actions are tuples indexed by agent position `1..=k`. Internally
/// states, propositions and actions are dense indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccgs {
    agent_count: usize,
    states: Vec<String>,
    initial: usize,
    propositions: Vec<String>,
    labels: Vec<BTreeSet<usize>>,
    /// actions[state][agent0] -> ordered action names.
    actions: Vec<Vec<Vec<String>>>,
    /// transitions[state]: joint action (as per-agent action indices, sorted
    /// lexicographically) -> successor state.
    transitions: Vec<Vec<(Vec<usize>, usize)>>,
    costs: Vec<CostDistribution>,
}

impl Ccgs {
    pub fn from_json(doc: &str) -> Result<Self, ModelError> {
        let doc: ModelDoc = serde_json::from_str(doc)?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: ModelDoc) -> Result<Self, ModelError> {
        let k = doc.agents;
        if k == 0 {
            return Err(ModelError::NoAgents);
        }
        if doc.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        let mut state_idx = BTreeMap::new();
        for (i, s) in doc.states.iter().enumerate() {
            if state_idx.insert(s.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(s.clone()));
            }
        }
        let initial = *state_idx
            .get(&doc.initial)
            .ok_or_else(|| ModelError::UnknownState(doc.initial.clone()))?;
        let mut prop_idx = BTreeMap::new();
        for (i, p) in doc.propositions.iter().enumerate() {
            if prop_idx.insert(p.clone(), i).is_some() {
                return Err(ModelError::DuplicateProposition(p.clone()));
            }
        }

        let mut labels = vec![BTreeSet::new(); doc.states.len()];
        for (state, props) in &doc.labels {
            let q = *state_idx
                .get(state)
                .ok_or_else(|| ModelError::UnknownState(state.clone()))?;
            for p in props {
                let pid = *prop_idx
                    .get(p)
                    .ok_or_else(|| ModelError::UnknownProposition(p.clone(), state.clone()))?;
                labels[q].insert(pid);
            }
        }

        let mut actions = vec![vec![Vec::new(); k]; doc.states.len()];
        for (state, table) in &doc.actions {
            let q = *state_idx
                .get(state)
                .ok_or_else(|| ModelError::UnknownState(state.clone()))?;
            for (agent_key, acts) in table {
                let agent: usize = agent_key
                    .parse()
                    .ok()
                    .filter(|a| (1..=k).contains(a))
                    .ok_or_else(|| ModelError::UnknownAgent(agent_key.clone(), k))?;
                let mut seen = BTreeSet::new();
                for a in acts {
                    if !seen.insert(a.clone()) {
                        return Err(ModelError::DuplicateAction {
                            agent,
                            state: state.clone(),
                            action: a.clone(),
                        });
                    }
                }
                actions[q][agent - 1] = acts.clone();
            }
        }
        for (q, state) in doc.states.iter().enumerate() {
            if !doc.actions.contains_key(state) {
                return Err(ModelError::MissingActions(state.clone()));
            }
            for (i, acts) in actions[q].iter().enumerate() {
                if acts.is_empty() {
                    return Err(ModelError::EmptyActionSet {
                        agent: i + 1,
                        state: state.clone(),
                    });
                }
                if acts.len() > 32 {
                    return Err(ModelError::TooManyActions {
                        agent: i + 1,
                        state: state.clone(),
                    });
                }
            }
        }

        let mut transitions: Vec<BTreeMap<Vec<usize>, usize>> =
            vec![BTreeMap::new(); doc.states.len()];
        for t in &doc.transitions {
            let q = *state_idx
                .get(&t.from)
                .ok_or_else(|| ModelError::UnknownState(t.from.clone()))?;
            let to = *state_idx
                .get(&t.to)
                .ok_or_else(|| ModelError::UnknownState(t.to.clone()))?;
            if t.joint.len() != k {
                return Err(ModelError::JointLength {
                    state: t.from.clone(),
                    got: t.joint.len(),
                    expected: k,
                });
            }
            let mut joint = Vec::with_capacity(k);
            for (i, name) in t.joint.iter().enumerate() {
                let idx = actions[q][i].iter().position(|a| a == name).ok_or_else(|| {
                    ModelError::UnknownAction {
                        agent: i + 1,
                        state: t.from.clone(),
                        action: name.clone(),
                    }
                })?;
                joint.push(idx);
            }
            if transitions[q].insert(joint, to).is_some() {
                return Err(ModelError::DuplicateTransition {
                    state: t.from.clone(),
                    joint: t.joint.join(","),
                });
            }
        }
        // Totality: every joint action drawn from the action-set product must
        // have exactly one successor.
        for (q, state) in doc.states.iter().enumerate() {
            let mut joint = vec![0usize; k];
            loop {
                if !transitions[q].contains_key(&joint) {
                    let names: Vec<&str> = joint
                        .iter()
                        .enumerate()
                        .map(|(i, &a)| actions[q][i][a].as_str())
                        .collect();
                    return Err(ModelError::NonTotal {
                        state: state.clone(),
                        joint: names.join(","),
                    });
                }
                if !next_joint(&mut joint, |i| actions[q][i].len()) {
                    break;
                }
            }
            let expected: usize = actions[q].iter().map(|a| a.len()).product();
            debug_assert_eq!(transitions[q].len(), expected);
        }

        let mut costs = Vec::with_capacity(k);
        for agent in 1..=k {
            let dist = doc
                .costs
                .get(&agent.to_string())
                .ok_or(ModelError::MissingCost(agent))?;
            dist.validate().map_err(|e| ModelError::BadDistribution {
                agent,
                reason: e.to_string(),
            })?;
            costs.push(dist.clone());
        }

        Ok(Ccgs {
            agent_count: k,
            states: doc.states,
            initial,
            propositions: doc.propositions,
            labels,
            actions,
            transitions: transitions
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
            costs,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            agents: self.agent_count,
            states: self.states.clone(),
            initial: self.states[self.initial].clone(),
            propositions: self.propositions.clone(),
            labels: self
                .states
                .iter()
                .enumerate()
                .map(|(q, s)| {
                    (
                        s.clone(),
                        self.labels[q]
                            .iter()
                            .map(|&p| self.propositions[p].clone())
                            .collect(),
                    )
                })
                .collect(),
            actions: self
                .states
                .iter()
                .enumerate()
                .map(|(q, s)| {
                    (
                        s.clone(),
                        (1..=self.agent_count)
                            .map(|i| (i.to_string(), self.actions[q][i - 1].clone()))
                            .collect(),
                    )
                })
                .collect(),
            transitions: self
                .states
                .iter()
                .enumerate()
                .flat_map(|(q, s)| {
                    self.transitions[q].iter().map(move |(joint, to)| TransitionDoc {
                        from: s.clone(),
                        joint: joint
                            .iter()
                            .enumerate()
                            .map(|(i, &a)| self.actions[q][i][a].clone())
                            .collect(),
                        to: self.states[*to].clone(),
                    })
                })
                .collect(),
            costs: (1..=self.agent_count)
                .map(|i| (i.to_string(), self.costs[i - 1].clone()))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.propositions.iter().position(|p| p == name)
    }

    pub fn label(&self, q: usize) -> &BTreeSet<usize> {
        &self.labels[q]
    }

    pub fn label_names(&self, q: usize) -> BTreeSet<&str> {
        self.labels[q]
            .iter()
            .map(|&p| self.propositions[p].as_str())
            .collect()
    }

    /// Ordered action names of `agent` (1-based) at state `q`.
    pub fn actions_of(&self, q: usize, agent: usize) -> &[String] {
        &self.actions[q][agent - 1]
    }

    /// Transitions of `q` as (joint action indices, successor), sorted.
    pub fn transitions_of(&self, q: usize) -> &[(Vec<usize>, usize)] {
        &self.transitions[q]
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(|t| t.len()).sum()
    }

    pub fn cost_model(&self, agent: usize) -> &CostDistribution {
        &self.costs[agent - 1]
    }

    /// Copy of this structure with the cost priors replaced.
    pub fn with_cost_models(&self, costs: Vec<CostDistribution>) -> Ccgs {
        assert_eq!(costs.len(), self.agent_count);
        Ccgs {
            costs,
            ..self.clone()
        }
    }

    /// Total number of actions of `agent` over all states.
    pub fn action_total(&self, agent: usize) -> usize {
        (0..self.state_count())
            .map(|q| self.actions[q][agent - 1].len())
            .sum()
    }

    /// Largest restriction count available to `agent`: one action must
    /// survive in every state.
    pub fn max_restrictable(&self, agent: usize) -> usize {
        (0..self.state_count())
            .map(|q| self.actions[q][agent - 1].len() - 1)
            .sum()
    }

    /// Implement a social law: drop forbidden actions and the transitions
    /// that use them. Fails if the law is not proper for this structure.
    pub fn apply_law(&self, law: &SocialLaw) -> Result<Ccgs, ModelError> {
        let masks = law.compile(self)?;
        Ok(self.apply_masks(&masks))
    }

    pub(crate) fn apply_masks(&self, masks: &LawMasks) -> Ccgs {
        let mut actions = Vec::with_capacity(self.states.len());
        let mut transitions = Vec::with_capacity(self.states.len());
        for q in 0..self.states.len() {
            let survivors: Vec<Vec<usize>> = (0..self.agent_count)
                .map(|i| {
                    (0..self.actions[q][i].len())
                        .filter(|&a| masks.0[q][i] & (1 << a) == 0)
                        .collect()
                })
                .collect();
            let remap: Vec<BTreeMap<usize, usize>> = survivors
                .iter()
                .map(|keep| keep.iter().enumerate().map(|(new, &old)| (old, new)).collect())
                .collect();
            actions.push(
                survivors
                    .iter()
                    .enumerate()
                    .map(|(i, keep)| {
                        keep.iter()
                            .map(|&a| self.actions[q][i][a].clone())
                            .collect()
                    })
                    .collect(),
            );
            transitions.push(
                self.transitions[q]
                    .iter()
                    .filter_map(|(joint, to)| {
                        let mut new_joint = Vec::with_capacity(joint.len());
                        for (i, &a) in joint.iter().enumerate() {
                            new_joint.push(*remap[i].get(&a)?);
                        }
                        Some((new_joint, *to))
                    })
                    .collect(),
            );
        }
        Ccgs {
            agent_count: self.agent_count,
            states: self.states.clone(),
            initial: self.initial,
            propositions: self.propositions.clone(),
            labels: self.labels.clone(),
            actions,
            transitions,
            costs: self.costs.clone(),
        }
    }
}

fn next_joint(joint: &mut [usize], len_of: impl Fn(usize) -> usize) -> bool {
    for i in (0..joint.len()).rev() {
        joint[i] += 1;
        if joint[i] < len_of(i) {
            return true;
        }
        joint[i] = 0;
    }
    false
}

/// Forbidden-action bitmasks, one per (state, agent), against a fixed
/// structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LawMasks(pub Vec<Vec<u32>>);

impl LawMasks {
    pub fn empty(model: &Ccgs) -> Self {
        LawMasks(vec![vec![0; model.agent_count()]; model.state_count()])
    }

    /// Restricted-action count per agent (0-based positions).
    pub fn counts(&self, model: &Ccgs) -> Vec<usize> {
        let mut counts = vec![0usize; model.agent_count()];
        for q in 0..model.state_count() {
            for (i, count) in counts.iter_mut().enumerate() {
                *count += self.0[q][i].count_ones() as usize;
            }
        }
        counts
    }

    pub fn total(&self) -> usize {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|m| m.count_ones() as usize)
            .sum()
    }

    /// Flat forbidden bits in canonical variable order: states in document
    /// order, agents ascending, actions in document order. Lexicographic
    /// comparison of these vectors is the shared allocation tie-break.
    pub fn lex_bits(&self, model: &Ccgs) -> Vec<u8> {
        let mut bits = Vec::new();
        for q in 0..model.state_count() {
            for i in 1..=model.agent_count() {
                for a in 0..model.actions_of(q, i).len() {
                    bits.push(((self.0[q][i - 1] >> a) & 1) as u8);
                }
            }
        }
        bits
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LawDoc {
    restrict: Vec<RestrictionDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RestrictionDoc {
    agent: usize,
    state: String,
    action: String,
}

/// A social law: per agent and state, the set of forbidden action names.
/// Unmentioned pairs default to the empty set. Validity against a structure
/// (known names, at least one surviving action per pair) is checked when the
/// law is applied.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SocialLaw {
    restrictions: BTreeMap<(usize, String), BTreeSet<String>>,
}

impl SocialLaw {
    pub fn empty() -> Self {
        SocialLaw::default()
    }

    pub fn forbid(&mut self, agent: usize, state: &str, action: &str) {
        self.restrictions
            .entry((agent, state.to_string()))
            .or_default()
            .insert(action.to_string());
    }

    pub fn from_entries<'a>(entries: impl IntoIterator<Item = (usize, &'a str, &'a str)>) -> Self {
        let mut law = SocialLaw::empty();
        for (agent, state, action) in entries {
            law.forbid(agent, state, action);
        }
        law
    }

    pub fn from_json(doc: &str) -> Result<Self, ModelError> {
        let doc: LawDoc = serde_json::from_str(doc)?;
        let mut law = SocialLaw::empty();
        for r in doc.restrict {
            law.forbid(r.agent, &r.state, &r.action);
        }
        Ok(law)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LawDoc {
            restrict: self.entries().map(|(agent, state, action)| RestrictionDoc {
                agent,
                state: state.to_string(),
                action: action.to_string(),
            }).collect(),
        })
        .expect("law serialization cannot fail")
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &str, &str)> {
        self.restrictions.iter().flat_map(|((agent, state), acts)| {
            acts.iter().map(move |a| (*agent, state.as_str(), a.as_str()))
        })
    }

    pub fn is_empty(&self) -> bool {
        self.restrictions.values().all(|s| s.is_empty())
    }

    /// Number of restricted actions of `agent` over all states.
    pub fn size(&self, agent: usize) -> usize {
        self.restrictions
            .iter()
            .filter(|((a, _), _)| *a == agent)
            .map(|(_, acts)| acts.len())
            .sum()
    }

    pub fn total_size(&self) -> usize {
        self.restrictions.values().map(|s| s.len()).sum()
    }

    /// Union of two laws; restriction sets merge pointwise.
    pub fn union(&self, other: &SocialLaw) -> SocialLaw {
        let mut law = self.clone();
        for (agent, state, action) in other.entries() {
            law.forbid(agent, state, action);
        }
        law
    }

    /// Validate against `model` and lower to per-(state, agent) bitmasks.
    pub(crate) fn compile(&self, model: &Ccgs) -> Result<LawMasks, ModelError> {
        let mut masks = LawMasks::empty(model);
        for ((agent, state), acts) in &self.restrictions {
            if !(1..=model.agent_count()).contains(agent) {
                return Err(ModelError::LawUnknownAgent(*agent));
            }
            let q = model
                .state_index(state)
                .ok_or_else(|| ModelError::LawUnknownState(state.clone()))?;
            for action in acts {
                let idx = model
                    .actions_of(q, *agent)
                    .iter()
                    .position(|a| a == action)
                    .ok_or_else(|| ModelError::LawUnknownAction {
                        agent: *agent,
                        state: state.clone(),
                        action: action.clone(),
                    })?;
                masks.0[q][agent - 1] |= 1 << idx;
            }
        }
        for q in 0..model.state_count() {
            for i in 1..=model.agent_count() {
                let available = model.actions_of(q, i).len();
                if masks.0[q][i - 1].count_ones() as usize >= available {
                    return Err(ModelError::LawEmptiesActions {
                        agent: i,
                        state: model.state_name(q).to_string(),
                    });
                }
            }
        }
        Ok(masks)
    }

    /// Rebuild a named law from masks.
    pub(crate) fn from_masks(model: &Ccgs, masks: &LawMasks) -> SocialLaw {
        let mut law = SocialLaw::empty();
        for q in 0..model.state_count() {
            for i in 1..=model.agent_count() {
                let mask = masks.0[q][i - 1];
                for (a, name) in model.actions_of(q, i).iter().enumerate() {
                    if mask & (1 << a) != 0 {
                        law.forbid(i, model.state_name(q), name);
                    }
                }
            }
        }
        law
    }
}

impl fmt::Display for SocialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self
            .entries()
            .map(|(agent, state, action)| format!("{state}:{agent}:{action}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Iterator over every valid social law of a structure, in lexicographic
/// order over the per-(state, agent) forbidden-subset choices. The subset at
/// each slot steps through bitmasks `0, 1, ..` skipping the full mask.
pub struct LawEnumerator<'a> {
    model: &'a Ccgs,
    slots: Vec<(usize, usize, u32)>, // (state, agent0, full mask)
    current: Option<Vec<u32>>,
}

impl<'a> LawEnumerator<'a> {
    fn new(model: &'a Ccgs) -> Self {
        let mut slots = Vec::new();
        for q in 0..model.state_count() {
            for i in 0..model.agent_count() {
                let n = model.actions[q][i].len();
                slots.push((q, i, (1u32 << n) - 1));
            }
        }
        LawEnumerator {
            model,
            current: Some(vec![0; slots.len()]),
            slots,
        }
    }

    /// Number of laws the stream will yield.
    pub fn count_laws(model: &Ccgs) -> u128 {
        let mut total: u128 = 1;
        for q in 0..model.state_count() {
            for i in 1..=model.agent_count() {
                let n = model.actions_of(q, i).len() as u32;
                total *= (1u128 << n) - 1; // proper subsets of an n-set
            }
        }
        total
    }

    pub(crate) fn masks_iter(model: &'a Ccgs) -> impl Iterator<Item = LawMasks> + 'a {
        LawEnumeratorMasks(LawEnumerator::new(model))
    }
}

struct LawEnumeratorMasks<'a>(LawEnumerator<'a>);

impl<'a> Iterator for LawEnumeratorMasks<'a> {
    type Item = LawMasks;

    fn next(&mut self) -> Option<LawMasks> {
        let e = &mut self.0;
        let current = e.current.as_ref()?;
        let mut grid = vec![vec![0u32; e.model.agent_count()]; e.model.state_count()];
        for (slot, &(q, i, _)) in e.slots.iter().enumerate() {
            grid[q][i] = current[slot];
        }
        let out = LawMasks(grid);
        // advance: last slot is least significant
        let mut next = current.clone();
        let mut pos = e.slots.len();
        loop {
            if pos == 0 {
                e.current = None;
                break;
            }
            pos -= 1;
            next[pos] += 1;
            // skip the full mask: the law must leave one action available
            if next[pos] < e.slots[pos].2 {
                e.current = Some(next);
                break;
            }
            next[pos] = 0;
        }
        Some(out)
    }
}

impl<'a> Iterator for LawEnumerator<'a> {
    type Item = SocialLaw;

    fn next(&mut self) -> Option<SocialLaw> {
        let model = self.model;
        LawEnumeratorMasks(LawEnumerator {
            model,
            slots: std::mem::take(&mut self.slots),
            current: self.current.take(),
        })
        .next()
        .map(|m| SocialLaw::from_masks(model, &m))
    }
}

/// Stream of every valid social law, each exactly once.
pub fn enumerate_social_laws(model: &Ccgs) -> impl Iterator<Item = SocialLaw> + '_ {
    LawEnumerator::masks_iter(model).map(move |m| SocialLaw::from_masks(model, &m))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = include_str!("../fixtures/ex1_identity.json");

    fn ex1() -> Ccgs {
        Ccgs::from_json(EX1).unwrap()
    }

    #[test]
    fn loads_example_model() {
        let m = ex1();
        assert_eq!(m.agent_count(), 2);
        assert_eq!(m.state_count(), 5);
        assert_eq!(m.transition_count(), 17);
        assert_eq!(m.actions_of(0, 1), &["r".to_string(), "a".to_string()]);
        assert_eq!(m.state_name(m.initial()), "q0");
    }

    #[test]
    fn rejects_non_total_transitions() {
        let mut doc: serde_json::Value = serde_json::from_str(EX1).unwrap();
        let ts = doc["transitions"].as_array_mut().unwrap();
        ts.retain(|t| t["from"] != "q4"); // drop the only joint action of q4
        let err = Ccgs::from_json(&doc.to_string()).unwrap_err();
        assert!(
            err.to_string().contains("non-total transition function"),
            "unexpected error: {err}"
        );
    }

    #[test]
    fn rejects_empty_action_set() {
        let doc = EX1.replace("\"q4\": {\"1\": [\"r\"], \"2\": [\"r\"]}", "\"q4\": {\"1\": [], \"2\": [\"r\"]}");
        let err = Ccgs::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("empty action set"), "unexpected error: {err}");
    }

    #[test]
    fn rejects_unknown_action_in_transition() {
        let doc = EX1.replace(
            "{\"from\": \"q4\", \"joint\": [\"r\", \"r\"], \"to\": \"q4\"}",
            "{\"from\": \"q4\", \"joint\": [\"z\", \"r\"], \"to\": \"q4\"}",
        );
        let err = Ccgs::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("unknown action"), "unexpected error: {err}");
    }

    #[test]
    fn apply_law_restricts_actions_and_transitions() {
        let m = ex1();
        let eta3 = SocialLaw::from_entries([(2, "q2", "w"), (1, "q3", "w")]);
        let r = m.apply_law(&eta3).unwrap();
        assert_eq!(r.actions_of(2, 2), &["r".to_string()]);
        assert_eq!(r.actions_of(3, 1), &["r".to_string()]);
        let q2 = r.state_index("q2").unwrap();
        assert_eq!(r.transitions_of(q2).len(), 2);
    }

    #[test]
    fn apply_empty_law_is_identity() {
        let m = ex1();
        let r = m.apply_law(&SocialLaw::empty()).unwrap();
        assert_eq!(m, r);
    }

    #[test]
    fn apply_rejects_emptying_restriction() {
        let m = ex1();
        let law = SocialLaw::from_entries([(1, "q0", "r"), (1, "q0", "a")]);
        let err = m.apply_law(&law).unwrap_err();
        assert!(matches!(err, ModelError::LawEmptiesActions { agent: 1, .. }), "{err}");
    }

    #[test]
    fn law_sizes_match_restriction_counts() {
        let eta3 = SocialLaw::from_entries([(2, "q2", "w"), (1, "q3", "w")]);
        assert_eq!(eta3.size(1), 1);
        assert_eq!(eta3.size(2), 1);
        let eta7 = SocialLaw::from_entries([
            (2, "q2", "w"),
            (1, "q3", "w"),
            (1, "q2", "r"),
            (2, "q3", "r"),
        ]);
        assert_eq!(eta7.size(2), 2);
        assert_eq!(SocialLaw::empty().size(1), 0);
    }

    #[test]
    fn enumerates_all_laws_of_example() {
        let m = ex1();
        // four 2-action states contribute 3 proper subsets per agent, q4 one
        let expected = LawEnumerator::count_laws(&m);
        assert_eq!(expected, 6561);
        assert_eq!(enumerate_social_laws(&m).count() as u128, expected);
    }

    #[test]
    fn enumeration_is_deduplicated_and_valid() {
        let m = ex1();
        let mut seen = std::collections::BTreeSet::new();
        for law in enumerate_social_laws(&m) {
            assert!(law.compile(&m).is_ok());
            assert!(seen.insert(format!("{law}")), "duplicate law {law}");
        }
        assert_eq!(seen.len(), 6561);
    }

    #[test]
    fn single_slot_enumeration_order() {
        let doc = r#"{
            "agents": 1,
            "states": ["s"],
            "initial": "s",
            "propositions": [],
            "labels": {},
            "actions": {"s": {"1": ["x", "y"]}},
            "transitions": [
                {"from": "s", "joint": ["x"], "to": "s"},
                {"from": "s", "joint": ["y"], "to": "s"}
            ],
            "costs": {"1": {"dist": "identity_virtual", "point": 1}}
        }"#;
        let m = Ccgs::from_json(doc).unwrap();
        let laws: Vec<SocialLaw> = enumerate_social_laws(&m).collect();
        assert_eq!(laws.len(), 3);
        assert!(laws[0].is_empty());
        assert_eq!(laws[1], SocialLaw::from_entries([(1, "s", "x")]));
        assert_eq!(laws[2], SocialLaw::from_entries([(1, "s", "y")]));
    }

    #[test]
    fn one_action_state_admits_only_empty_law() {
        let doc = r#"{
            "agents": 1,
            "states": ["s"],
            "initial": "s",
            "propositions": [],
            "labels": {},
            "actions": {"s": {"1": ["x"]}},
            "transitions": [{"from": "s", "joint": ["x"], "to": "s"}],
            "costs": {"1": {"dist": "identity_virtual", "point": 1}}
        }"#;
        let m = Ccgs::from_json(doc).unwrap();
        let laws: Vec<SocialLaw> = enumerate_social_laws(&m).collect();
        assert_eq!(laws.len(), 1);
        assert!(laws[0].is_empty());
    }

    #[test]
    fn law_union_composes_application() {
        let m = ex1();
        let a = SocialLaw::from_entries([(2, "q2", "w")]);
        let b = SocialLaw::from_entries([(1, "q3", "w")]);
        let seq = m.apply_law(&a).unwrap().apply_law(&b).unwrap();
        let joint = m.apply_law(&a.union(&b)).unwrap();
        assert_eq!(seq, joint);
    }

    #[test]
    fn model_round_trips_through_json() {
        let m = ex1();
        let again = Ccgs::from_json(&m.to_json()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn law_round_trips_through_json() {
        let law = SocialLaw::from_entries([(2, "q2", "w"), (1, "q3", "w")]);
        let again = SocialLaw::from_json(&law.to_json()).unwrap();
        assert_eq!(law, again);
    }
}
