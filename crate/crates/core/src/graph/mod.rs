//! Directed and partially directed graphs, d-separation, Meek's rules,
//! CPDAG construction and Markov equivalence class enumeration.

mod dag;
mod diagnostics;
mod meek;
mod mec;
mod pdag;
mod sepset;

pub use dag::Dag;
pub use diagnostics::{diagnostics, min_separator_size, Diagnostics};
pub use meek::{apply_meek_rules, get_cpdag, orient_with_known_separations, Orientation};
pub use mec::{cpdag_of, enumerate_mec, MEC_NODE_LIMIT};
pub use pdag::{EdgeMark, Pdag};
pub use sepset::SepSetMap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("edge `{0}` -> `{1}` would create a directed cycle")]
    Cycle(String, String),
    #[error("no separating set recorded for non-adjacent pair `{0}`, `{1}`")]
    MissingSepSet(String, String),
    #[error("graph has {n} nodes; equivalence-class enumeration is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("partially directed graph admits no consistent DAG extension")]
    NoExtension,
}

/// An unshielded collider `p -> r <- q` with `p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct UnshieldedCollider {
    pub p: usize,
    pub r: usize,
    pub q: usize,
    /// Size of the smallest set separating `p` and `q`, when computed.
    pub sep_size: Option<usize>,
}

impl UnshieldedCollider {
    pub fn new(a: usize, r: usize, b: usize) -> Self {
        let (p, q) = if a < b { (a, b) } else { (b, a) };
        Self { p, r, q, sep_size: None }
    }
}
