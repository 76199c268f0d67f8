use itertools::Itertools;

use super::{settle, LocalStructure};
use crate::ci::{CiError, CiSource};
use crate::graph::{orient_with_known_separations, Pdag, SepSetMap};
use crate::NodeSet;

/// One edge removal produced by the PC skeleton phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub a: usize,
    pub b: usize,
    pub sepset: NodeSet,
}

/// The PC skeleton phase as a resumable stream of removals.
///
/// Levels run `0, 1, 2, ...`; within a level, ordered pairs `(a, b)` are
/// visited with `a` ascending and `b` over the current neighbors of `a`;
/// conditioning sets are drawn from the current `Ne(a) \ {b}` in
/// lexicographic order. Neighbor sets are read at visit time, so removals
/// take effect immediately within a level.
#[derive(Debug, Clone)]
pub struct PcStream {
    graph: Pdag,
    skip: Option<usize>,
    level: usize,
    a: usize,
    pending: Option<Vec<usize>>,
    eligible: bool,
    finished: bool,
}

impl PcStream {
    /// A stream over `graph`. Pairs involving `skip` are never tested,
    /// though `skip` may still appear in conditioning sets.
    pub fn new(graph: Pdag, skip: Option<usize>) -> Self {
        Self {
            graph,
            skip,
            level: 0,
            a: 0,
            pending: None,
            eligible: false,
            finished: false,
        }
    }

    pub fn graph(&self) -> &Pdag {
        &self.graph
    }

    pub fn into_graph(self) -> Pdag {
        self.graph
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Runs tests until the next edge removal, or `None` when the skeleton
    /// phase is complete.
    pub fn next_removal(&mut self, src: &CiSource) -> Result<Option<Removal>, CiError> {
        let n = self.graph.n();
        loop {
            if self.finished {
                return Ok(None);
            }
            if self.a >= n {
                if !self.eligible {
                    self.finished = true;
                    return Ok(None);
                }
                self.level += 1;
                self.a = 0;
                self.eligible = false;
                continue;
            }
            let a = self.a;
            let pending = self.pending.get_or_insert_with(|| {
                if Some(a) == self.skip {
                    Vec::new()
                } else {
                    // reversed so that pop() yields ascending order
                    let mut v: Vec<usize> = self
                        .graph
                        .neighbors(a)
                        .into_iter()
                        .filter(|&b| Some(b) != self.skip)
                        .collect();
                    v.reverse();
                    v
                }
            });
            let Some(b) = pending.pop() else {
                self.pending = None;
                self.a += 1;
                continue;
            };
            if !self.graph.adjacent(a, b) {
                continue;
            }
            let candidates: Vec<usize> = self
                .graph
                .neighbors(a)
                .into_iter()
                .filter(|&v| v != b)
                .collect();
            if candidates.len() < self.level {
                continue;
            }
            self.eligible = true;
            for s in candidates.into_iter().combinations(self.level) {
                let s: NodeSet = s.into_iter().collect();
                if src.independent(a, b, &s)? {
                    self.graph.remove_edge(a, b);
                    return Ok(Some(Removal { a, b, sepset: s }));
                }
            }
        }
    }
}

/// PC output: the CPDAG, recorded separating sets, and whether the test
/// cap interrupted the skeleton phase.
#[derive(Debug, Clone)]
pub struct PcResult {
    pub cpdag: Pdag,
    pub sepsets: SepSetMap,
    pub capped: bool,
}

/// Full PC over every variable of `src`.
pub fn run_pc(src: &CiSource) -> Result<PcResult, CiError> {
    let (orientation, sepsets, capped) = pc_orientation(src)?;
    Ok(PcResult {
        cpdag: orientation.graph,
        sepsets,
        capped,
    })
}

fn pc_orientation(
    src: &CiSource,
) -> Result<(crate::graph::Orientation, SepSetMap, bool), CiError> {
    let names = src.names();
    let mut stream = PcStream::new(Pdag::complete(&names), None);
    let mut sepsets = SepSetMap::new();
    let mut capped = false;
    loop {
        match stream.next_removal(src) {
            Ok(Some(r)) => sepsets.insert(r.a, r.b, r.sepset),
            Ok(None) => break,
            Err(CiError::CapReached(_)) => {
                capped = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    // every non-adjacent pair has a recorded separating set here
    let orientation = orient_with_known_separations(stream.graph(), &sepsets);
    Ok((orientation, sepsets, capped))
}

pub(super) fn run_pc_local(src: &CiSource, x: usize) -> Result<LocalStructure, CiError> {
    let (orientation, sepsets, capped) = pc_orientation(src)?;
    let mut ls = LocalStructure::new(x);
    let ne = orientation.graph.neighbors(x);
    ls.absorb(&orientation, &ne, &sepsets);
    ls.capped = capped;
    settle(Ok(()), ls, src)
}

/// Prunes the edges at `v` in `skeleton`: `v -- b` is removed as soon as
/// `v ⟂ b | S` for some `S` drawn from the current `Ne(v) \ {b}`, sizes
/// increasing from zero. Separating sets are recorded in `dsep`.
pub fn local_pc_in_place(
    src: &CiSource,
    skeleton: &mut Pdag,
    v: usize,
    dsep: &mut SepSetMap,
) -> Result<(), CiError> {
    let mut level = 0;
    while skeleton.neighbors(v).len() > level {
        let snapshot: Vec<usize> = skeleton.neighbors(v).into_iter().collect();
        for b in snapshot {
            if !skeleton.adjacent(v, b) {
                continue;
            }
            let candidates: Vec<usize> = skeleton
                .neighbors(v)
                .into_iter()
                .filter(|&u| u != b)
                .collect();
            for s in candidates.into_iter().combinations(level) {
                let s: NodeSet = s.into_iter().collect();
                if src.independent(v, b, &s)? {
                    skeleton.remove_edge(v, b);
                    dsep.insert(v, b, s);
                    break;
                }
            }
        }
        level += 1;
    }
    Ok(())
}

/// Functional form of [`local_pc_in_place`]: returns the pruned skeleton,
/// `Ne(v)` in it, and the separating sets found.
pub fn local_pc(
    src: &CiSource,
    skeleton: &Pdag,
    v: usize,
) -> Result<(Pdag, NodeSet, SepSetMap), CiError> {
    let mut g = skeleton.clone();
    let mut dsep = SepSetMap::new();
    local_pc_in_place(src, &mut g, v, &mut dsep)?;
    let ne = g.neighbors(v);
    Ok((g, ne, dsep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cpdag_of, Dag};
    use crate::{fixtures, node_set};
    use std::sync::Arc;

    fn oracle(g: &Dag) -> CiSource {
        CiSource::oracle(Arc::new(g.clone()))
    }

    #[test]
    fn pc_recovers_fig1_cpdag() {
        let g = fixtures::fig1();
        let res = run_pc(&oracle(&g)).unwrap();
        assert_eq!(res.cpdag, cpdag_of(&g));
        let id = |s| g.index_of(s).unwrap();
        assert!(res.cpdag.is_directed(id("A"), id("W")));
        assert!(res.cpdag.is_directed(id("X"), id("M")));
        assert!(res.cpdag.is_undirected(id("C"), id("A")));
    }

    #[test]
    fn pc_on_independent_nodes_is_empty() {
        let g = Dag::new(&["A", "B", "C"]).unwrap();
        let res = run_pc(&oracle(&g)).unwrap();
        assert_eq!(res.cpdag.edge_count(), 0);
    }

    #[test]
    fn pc_on_dependent_pair_keeps_undirected_edge() {
        let g = Dag::from_named_edges(&["A", "B"], &[("A", "B")]).unwrap();
        let res = run_pc(&oracle(&g)).unwrap();
        assert!(res.cpdag.is_undirected(0, 1));
    }

    #[test]
    fn local_pc_within_fig1_blanket() {
        let g = fixtures::fig1();
        let id = |s| g.index_of(s).unwrap();
        let mut skel = Pdag::empty(g.names());
        for v in ["W", "M", "Y"] {
            skel.set_undirected(id("X"), id(v));
        }
        let (_, ne, dsep) = local_pc(&oracle(&g), &skel, id("X")).unwrap();
        assert_eq!(ne, node_set([id("W"), id("M")]));
        assert_eq!(dsep.get(id("X"), id("Y")), Some(&node_set([id("W"), id("M")])));
    }

    #[test]
    fn local_pc_isolated_and_complete() {
        let g = Dag::new(&["X", "A"]).unwrap();
        let (_, ne, _) = local_pc(&oracle(&g), &Pdag::complete(g.names()), 0).unwrap();
        assert!(ne.is_empty());
        let g = Dag::from_named_edges(
            &["X", "A", "B"],
            &[("X", "A"), ("X", "B"), ("A", "B")],
        )
        .unwrap();
        let (_, ne, _) = local_pc(&oracle(&g), &Pdag::complete(g.names()), 0).unwrap();
        assert_eq!(ne, node_set([1, 2]));
    }

    #[test]
    fn stream_respects_skip() {
        let g = fixtures::fig1();
        let x = g.index_of("X").unwrap();
        let src = oracle(&g);
        let mut stream = PcStream::new(Pdag::complete(g.names()), Some(x));
        while let Some(r) = stream.next_removal(&src).unwrap() {
            assert!(r.a != x && r.b != x);
        }
        assert_eq!(stream.graph().neighbors(x).len(), g.n() - 1);
    }
}
