//! Local structure learning around a target node: PC, SD (and its MB-by-MB
//! variant), LDECC, and a runner interleaving SD with LDECC.

mod combined;
mod ldecc;
mod pc;
mod sd;

pub use combined::{run_combined, CombinedResult};
pub use ldecc::{ecc_parents, get_mns, run_ldecc, uc_children, LdeccOptions, MnsResult};
pub use pc::{local_pc, local_pc_in_place, run_pc, PcResult, PcStream, Removal};
pub use sd::run_sd;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ci::{CiError, CiSource};
use crate::faithfulness::FaithfulnessVerdict;
use crate::graph::{Orientation, Pdag, SepSetMap, UnshieldedCollider};
use crate::NodeSet;

/// Discovery algorithms selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Pc,
    Sd,
    MbByMb,
    Ldecc,
    LdeccChecks,
    Combined,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Pc,
        Algorithm::Sd,
        Algorithm::MbByMb,
        Algorithm::Ldecc,
        Algorithm::LdeccChecks,
        Algorithm::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pc => "pc",
            Algorithm::Sd => "sd",
            Algorithm::MbByMb => "mb-by-mb",
            Algorithm::Ldecc => "ldecc",
            Algorithm::LdeccChecks => "ldecc-checks",
            Algorithm::Combined => "combined",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// One eager collider check that fired: `a ⟂ b | s` but not given
/// `s ∪ {X}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EccRecord {
    pub a: usize,
    pub b: usize,
    pub s: NodeSet,
    /// Nodes marked as parents because of this check.
    pub fired_parents: NodeSet,
    /// Minimal neighbor separators looked up for endpoints outside `Ne(X)`.
    pub mns: Vec<(usize, MnsResult)>,
}

/// What a discovery run learned about the neighborhood of its target.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LocalStructure {
    pub target: usize,
    pub parents: NodeSet,
    pub children: NodeSet,
    pub unoriented: NodeSet,
    /// Pairs `(a, b)`, `a < b`, recorded as `a -- X -- b` non-colliders.
    pub non_colliders: BTreeSet<(usize, usize)>,
    #[serde(skip)]
    pub sepsets: SepSetMap,
    pub tests_used: usize,
    pub capped: bool,
    pub ecc_log: Vec<EccRecord>,
    /// Colliders found while orienting (SD and PC only).
    pub detected_colliders: Vec<UnshieldedCollider>,
    /// For each parent, the indices into `detected_colliders` whose
    /// propagation oriented it.
    pub parent_origins: BTreeMap<usize, BTreeSet<usize>>,
    /// Nodes in the order SD processed them.
    pub visited: Vec<usize>,
    /// Separator-faithfulness verdicts gathered before each MNS lookup,
    /// when LDECC runs with the guard enabled.
    pub mff_verdicts: Vec<(usize, FaithfulnessVerdict)>,
}

impl LocalStructure {
    pub fn new(target: usize) -> Self {
        Self {
            target,
            ..Self::default()
        }
    }

    /// Every discovered neighbor of the target.
    pub fn neighbors(&self) -> NodeSet {
        self.parents
            .iter()
            .chain(&self.children)
            .chain(&self.unoriented)
            .copied()
            .collect()
    }

    pub fn is_non_collider(&self, a: usize, b: usize) -> bool {
        self.non_colliders.contains(&(a.min(b), a.max(b)))
    }

    pub fn mark_non_collider(&mut self, a: usize, b: usize) {
        self.non_colliders.insert((a.min(b), a.max(b)));
    }

    /// Reads parents and children of the target off an orientation; the
    /// rest of `ne` is unoriented. Also keeps collider provenance and the
    /// non-colliders implied by the recorded separating sets.
    fn absorb(&mut self, o: &Orientation, ne: &NodeSet, dsep: &SepSetMap) {
        let x = self.target;
        let g: &Pdag = &o.graph;
        self.parents = g.parents(x);
        self.children = g.children(x);
        self.unoriented = ne
            .iter()
            .filter(|v| !self.parents.contains(v) && !self.children.contains(v))
            .copied()
            .collect();
        self.detected_colliders = o.colliders.clone();
        self.parent_origins = self
            .parents
            .iter()
            .map(|&p| (p, o.origins(p, x)))
            .collect();
        self.non_colliders.clear();
        let ne: Vec<usize> = ne.iter().copied().collect();
        for (i, &a) in ne.iter().enumerate() {
            for &b in &ne[i + 1..] {
                if dsep.get(a, b).is_some_and(|s| s.contains(&x)) {
                    self.non_colliders.insert((a, b));
                }
            }
        }
        self.sepsets = dsep.clone();
    }
}

/// Runs `algo` against `src` with target `x`. The combined runner forks two
/// fresh sources with the same engine and settings; its reported test count
/// is the sum over both.
pub fn discover(src: &CiSource, x: usize, algo: Algorithm) -> Result<LocalStructure, CiError> {
    if x >= src.n() {
        return Err(CiError::UnknownNode(x));
    }
    match algo {
        Algorithm::Pc => pc::run_pc_local(src, x),
        Algorithm::Sd => run_sd(src, x, false),
        Algorithm::MbByMb => run_sd(src, x, true),
        Algorithm::Ldecc => run_ldecc(src, x, LdeccOptions::default()),
        Algorithm::LdeccChecks => run_ldecc(
            src,
            x,
            LdeccOptions {
                check: true,
                ..LdeccOptions::default()
            },
        ),
        Algorithm::Combined => run_combined(|_| src.fork(), x).map(|r| r.structure),
    }
}

/// Turns a cap or abort into a partial result; other errors pass through.
fn settle(
    outcome: Result<(), CiError>,
    mut ls: LocalStructure,
    src: &CiSource,
) -> Result<LocalStructure, CiError> {
    match outcome {
        Ok(()) => {}
        Err(CiError::CapReached(_)) => ls.capped = true,
        Err(e) => return Err(e),
    }
    ls.tests_used = src.tests_used();
    Ok(ls)
}
