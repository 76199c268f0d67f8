//! Local causal discovery around a treatment node.
//!
//! The crate learns the local structure (parents, children and unoriented
//! neighbors) of a treatment `X` with PC, Sequential Discovery (SD and its
//! MB-by-MB variant) and LDECC, turns that structure into a set of candidate
//! average treatment effects, and ships the pieces needed to evaluate those
//! algorithms: exact and statistical CI engines, faithfulness testers,
//! adjustment-set checks, synthetic generators and a test-count benchmark.
//!
//! Node identifiers are dense `usize` indices into a graph's canonical node
//! order (the order of the input file). Every iteration in the crate follows
//! that order so results and test counts are reproducible.

pub mod adjustment;
pub mod bench;
pub mod ci;
pub mod discovery;
pub mod faithfulness;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod synth;

use std::collections::BTreeSet;

/// A set of node indices, iterated in canonical order.
pub type NodeSet = BTreeSet<usize>;

/// Builds a [`NodeSet`] from anything iterable.
pub fn node_set<I: IntoIterator<Item = usize>>(items: I) -> NodeSet {
    items.into_iter().collect()
}

pub use ci::{CiEngine, CiError, CiQuery, CiSource, CiVerdict, Dataset};
pub use discovery::{Algorithm, LocalStructure};
pub use graph::{Dag, GraphError, Pdag, SepSetMap, UnshieldedCollider};
