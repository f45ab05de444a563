//! Graph temporal logic (GTL) over labeled graphs with time-varying node and edge labels.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the algorithmic part of the toolkit:
//!
//! * [`graph`]: labeled graphs, graph-temporal trajectories and neighbor operations.
//! * [`formula`]: the parametric formula language (AST, text syntax, instantiation) together
//!   with polarity, size and fragment analysis.
//! * [`eval`]: finite-trace satisfaction, coverage and misclassification rate.
//! * [`automata`]: translation of the co-safe/safe fragments into horizon-aware DFAs.
//! * [`prob`]: factored priors, exact satisfaction probabilities and information gain.
//! * [`identify`]: information-guided parameter identification over a monotone parameter space.
//! * [`classify`]: particle swarm search and pruning/growing of formulas for classification.
//! * [`templates`]: the built-in template library.
//!
//! File formats, data generators and the command-line tool live in the companion `gtl` crate.

#![no_std]

extern crate alloc;

pub mod automata;
pub mod classify;
mod error;
pub mod eval;
pub mod formula;
pub mod graph;
pub mod identify;
pub mod prob;
pub mod templates;

pub use error::{Error, ParseError, Result};
pub use formula::{Formula, ParameterBox, ParameterValuation};
pub use graph::{LabeledGraph, NodeId, Trajectory};
