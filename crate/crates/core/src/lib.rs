//! Synthesis of profit-optimal social laws for cost-aware concurrent game
//! structures.
//!
//! A social law forbids, per agent and per state, a proper subset of the
//! available actions. The designer values the restricted structure through a
//! feature set of alternating-time temporal logic formulas and buys
//! restrictions from self-interested agents in a single-parameter procurement
//! auction: the allocation maximizes value minus virtual cost, and payments
//! follow the turning points of each agent's allocation curve so that truthful
//! cost reporting is a dominant strategy.
//!
//! Modules:
//! - [`model`]: game structures, social laws, model files.
//! - [`logic`]: formula parsing, closure, fixpoint model checking,
//!   alternating bisimulation.
//! - [`valuation`]: feature sets and the induced valuation.
//! - [`distributions`]: agent cost priors and virtual costs.
//! - [`ilp`]: 0/1 integer-program encoding of allocation, exact desk-scale
//!   solving, LP emission.
//! - [`mechanism`]: allocation, turning-point payments, truthfulness and
//!   individual-rationality checks, Monte-Carlo estimates.

pub mod distributions;
pub mod ilp;
pub mod logic;
pub mod mechanism;
pub mod model;
pub mod valuation;
