use itertools::Itertools;
use serde::Serialize;

use super::{local_pc_in_place, settle, EccRecord, LocalStructure, PcStream};
use crate::ci::{find_markov_blanket, CiError, CiSource};
use crate::faithfulness::test_mff;
use crate::graph::{Pdag, SepSetMap};
use crate::NodeSet;

/// Result of a minimal-neighbor-separator search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "set")]
pub enum MnsResult {
    Found(NodeSet),
    NotFound,
}

impl MnsResult {
    pub fn found(&self) -> Option<&NodeSet> {
        match self {
            MnsResult::Found(s) => Some(s),
            MnsResult::NotFound => None,
        }
    }
}

/// First subset of `ne_x`, by increasing size and lexicographically within
/// a size, that separates `v` from `x`. The full set is tried last.
pub fn get_mns(src: &CiSource, x: usize, ne_x: &NodeSet, v: usize) -> Result<MnsResult, CiError> {
    let ne: Vec<usize> = ne_x.iter().copied().collect();
    for size in 0..=ne.len() {
        for s in ne.iter().copied().combinations(size) {
            let s: NodeSet = s.into_iter().collect();
            if src.independent(v, x, &s)? {
                return Ok(MnsResult::Found(s));
            }
        }
    }
    Ok(MnsResult::NotFound)
}

/// Parents implied by an eager collider check on `a, b`: each endpoint in
/// `ne_x` itself, otherwise its minimal neighbor separator. With `check`
/// and both endpoints outside `ne_x`, the separators must coincide or
/// nothing is returned. Lookups are appended to `lookups`.
pub fn ecc_parents(
    src: &CiSource,
    x: usize,
    a: usize,
    b: usize,
    ne_x: &NodeSet,
    check: bool,
    lookups: &mut Vec<(usize, MnsResult)>,
) -> Result<NodeSet, CiError> {
    let mns = |v: usize, lookups: &mut Vec<(usize, MnsResult)>| -> Result<MnsResult, CiError> {
        let r = get_mns(src, x, ne_x, v)?;
        lookups.push((v, r.clone()));
        Ok(r)
    };
    if check && !ne_x.contains(&a) && !ne_x.contains(&b) {
        let ma = mns(a, lookups)?;
        let mb = mns(b, lookups)?;
        return Ok(match (ma, mb) {
            (MnsResult::Found(sa), MnsResult::Found(sb)) if sa == sb => sa,
            _ => NodeSet::new(),
        });
    }
    let mut parents = NodeSet::new();
    for v in [a, b] {
        if ne_x.contains(&v) {
            parents.insert(v);
        } else if let MnsResult::Found(s) = mns(v, lookups)? {
            parents.extend(s);
        }
    }
    Ok(parents)
}

/// Children `C` of `x` in a collider `x -> C <- D` with a spouse `D`:
/// `C ∈ Ne(X) \ DSep(D, X)` with `C` dependent on `D` given `DSep(D, X)`.
pub fn uc_children(
    src: &CiSource,
    x: usize,
    mb_x: &NodeSet,
    ne_x: &NodeSet,
    dsep: &SepSetMap,
) -> Result<NodeSet, CiError> {
    let mut children = NodeSet::new();
    for &d in mb_x.difference(ne_x) {
        let sep = dsep.get(d, x).ok_or_else(|| {
            CiError::InvalidQuery(format!("no separating set recorded for spouse {d}"))
        })?;
        for &c in ne_x {
            if c == d || sep.contains(&c) {
                continue;
            }
            if !src.independent(c, d, sep)? {
                children.insert(c);
            }
        }
    }
    Ok(children)
}

/// LDECC switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LdeccOptions {
    /// Require both endpoints' separators to agree before an eager
    /// collider check marks parents.
    pub check: bool,
    /// Run the separator-faithfulness tester before every separator lookup
    /// for a node not seen before.
    pub mff_guard: bool,
}

/// LDECC: finds `Ne(X)` inside the Markov blanket, orients children through
/// spouses, then streams the PC skeleton tests between other nodes and
/// orients neighbors of `X` from each removal, stopping once none is left
/// unoriented.
pub fn run_ldecc(src: &CiSource, x: usize, opts: LdeccOptions) -> Result<LocalStructure, CiError> {
    let mut ls = LocalStructure::new(x);
    let outcome = ldecc_loop(src, x, opts, &mut ls);
    settle(outcome, ls, src)
}

fn ldecc_loop(
    src: &CiSource,
    x: usize,
    opts: LdeccOptions,
    ls: &mut LocalStructure,
) -> Result<(), CiError> {
    let names = src.names();
    let mb = find_markov_blanket(src, x)?;
    let mut local = Pdag::empty(&names);
    for &m in &mb {
        local.set_undirected(x, m);
    }
    let mut dsep = SepSetMap::new();
    local_pc_in_place(src, &mut local, x, &mut dsep)?;
    prune_with_blanket(src, &mut local, x, &mb, &mut dsep)?;
    let ne = local.neighbors(x);
    ls.unoriented = ne.clone();
    ls.sepsets = dsep;
    ls.children = uc_children(src, x, &mb, &ne, &ls.sepsets)?;
    refresh(ls, &ne);
    if ls.unoriented.is_empty() {
        return Ok(());
    }

    let mut u = Pdag::complete(&names);
    for v in 0..names.len() {
        if v != x && !ne.contains(&v) {
            u.remove_edge(x, v);
        }
    }
    let mut stream = PcStream::new(u, Some(x));
    let mut guarded = NodeSet::new();
    while let Some(r) = stream.next_removal(src)? {
        let (a, b, s) = (r.a, r.b, r.sepset);
        ls.sepsets.insert(a, b, s.clone());
        let both_near = ne.contains(&a) && ne.contains(&b);
        if both_near && !s.contains(&x) {
            ls.parents.extend([a, b]);
            ls.parents.extend(s.intersection(&ne).copied());
        } else if both_near {
            ls.mark_non_collider(a, b);
            for &v in &ne {
                if s.contains(&v) || v == a || v == b {
                    continue;
                }
                let mut with_v = s.clone();
                with_v.insert(v);
                if !src.independent(a, b, &with_v)? {
                    ls.children.insert(v);
                }
            }
        } else if !s.contains(&x) {
            let mut with_x = s.clone();
            with_x.insert(x);
            if !src.independent(a, b, &with_x)? {
                if opts.mff_guard {
                    for v in [a, b] {
                        if !ne.contains(&v) && guarded.insert(v) {
                            let verdict = test_mff(src, x, &ne, v)?;
                            ls.mff_verdicts.push((v, verdict));
                        }
                    }
                }
                let mut mns = Vec::new();
                let fired = ecc_parents(src, x, a, b, &ne, opts.check, &mut mns)?;
                ls.parents.extend(fired.iter().copied());
                ls.ecc_log.push(EccRecord {
                    a,
                    b,
                    s,
                    fired_parents: fired,
                    mns,
                });
            }
        }
        let parents: Vec<usize> = ls.parents.iter().copied().collect();
        let candidates: Vec<usize> = ls.unoriented.iter().copied().collect();
        for p in parents {
            for &c in &candidates {
                if c != p && ls.is_non_collider(p, c) {
                    ls.children.insert(c);
                }
            }
        }
        refresh(ls, &ne);
        if ls.unoriented.is_empty() {
            break;
        }
    }
    Ok(())
}

/// Prunes the survivors from their own side, inside `mb` and `x`: a spouse
/// that descends from `x` may only be separated from it by a set that
/// includes blanket members already dropped from `Ne(x)`.
fn prune_with_blanket(
    src: &CiSource,
    local: &mut Pdag,
    x: usize,
    mb: &NodeSet,
    dsep: &mut SepSetMap,
) -> Result<(), CiError> {
    if local.neighbors(x).len() == mb.len() {
        return Ok(());
    }
    for v in local.neighbors(x) {
        let mut around = Pdag::empty(&src.names());
        for &u in mb.iter().chain([&x]) {
            if u != v {
                around.set_undirected(v, u);
            }
        }
        let mut found = SepSetMap::new();
        local_pc_in_place(src, &mut around, v, &mut found)?;
        if let Some(s) = found.get(v, x) {
            local.remove_edge(x, v);
            dsep.insert(x, v, s.clone());
        }
    }
    Ok(())
}

/// Recomputes `unoriented`; a node marked both ways stays a parent.
fn refresh(ls: &mut LocalStructure, ne: &NodeSet) {
    let parents = ls.parents.clone();
    ls.children.retain(|c| !parents.contains(c));
    ls.unoriented = ne
        .iter()
        .filter(|v| !ls.parents.contains(v) && !ls.children.contains(v))
        .copied()
        .collect();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::{fixtures, node_set};
    use std::sync::Arc;

    fn fig1() -> (Arc<Dag>, CiSource) {
        let g = Arc::new(fixtures::fig1());
        (g.clone(), CiSource::oracle(g))
    }

    #[test]
    fn fig1_separators() {
        let (g, src) = fig1();
        let id = |s| g.index_of(s).unwrap();
        let ne = node_set([id("W"), id("M")]);
        for v in ["A", "B", "C"] {
            assert_eq!(
                get_mns(&src, id("X"), &ne, id(v)).unwrap(),
                MnsResult::Found(node_set([id("W")]))
            );
        }
        assert_eq!(
            get_mns(&src, id("X"), &ne, id("Y")).unwrap(),
            MnsResult::Found(ne.clone())
        );
    }

    #[test]
    fn separator_missing_for_descendant() {
        let g = Arc::new(fixtures::missing_mns());
        let src = CiSource::oracle(g.clone());
        let id = |s| g.index_of(s).unwrap();
        let ne = node_set([id("M")]);
        assert_eq!(
            get_mns(&src, id("X"), &ne, id("Y")).unwrap(),
            MnsResult::NotFound
        );
    }

    #[test]
    fn fig1_ecc_marks_w() {
        let (g, src) = fig1();
        let id = |s| g.index_of(s).unwrap();
        let ne = node_set([id("W"), id("M")]);
        let mut log = Vec::new();
        let p = ecc_parents(&src, id("X"), id("A"), id("B"), &ne, false, &mut log).unwrap();
        assert_eq!(p, node_set([id("W")]));
        let p = ecc_parents(&src, id("X"), id("W"), id("C"), &ne, false, &mut log).unwrap();
        assert_eq!(p, node_set([id("W")]));
    }

    #[test]
    fn spouse_collider_child() {
        let g = Arc::new(Dag::from_named_edges(&["X", "C", "D"], &[("X", "C"), ("D", "C")]).unwrap());
        let src = CiSource::oracle(g);
        let mut dsep = SepSetMap::new();
        dsep.insert(0, 2, NodeSet::new());
        let kids = uc_children(&src, 0, &node_set([1, 2]), &node_set([1]), &dsep).unwrap();
        assert_eq!(kids, node_set([1]));
        let none = uc_children(&src, 0, &node_set([1]), &node_set([1]), &dsep).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn fig1_has_no_spouse_children() {
        let (g, src) = fig1();
        let id = |s| g.index_of(s).unwrap();
        let x = id("X");
        let mut dsep = SepSetMap::new();
        dsep.insert(x, id("Y"), node_set([id("W"), id("M")]));
        let mb = node_set([id("W"), id("M"), id("Y")]);
        let kids = uc_children(&src, x, &mb, &node_set([id("W"), id("M")]), &dsep).unwrap();
        assert!(kids.is_empty());
    }

    #[test]
    fn descendant_spouse_needs_a_dropped_blanket_member() {
        // V1 is a spouse and a descendant of V6; its only separators from
        // V6 contain V0, which leaves Ne(V6) at the first level.
        let names: Vec<String> = (0..8).map(|i| format!("V{i}")).collect();
        let edges = [
            (0, 1), (0, 3), (0, 7), (1, 7), (2, 3), (3, 1), (3, 4),
            (4, 7), (5, 4), (6, 3), (6, 4), (6, 5), (6, 7),
        ];
        let named: Vec<(String, String)> =
            edges.iter().map(|(a, b)| (names[*a].clone(), names[*b].clone())).collect();
        let pairs: Vec<(&str, &str)> = named.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let g = Arc::new(Dag::from_named_edges(&names, &pairs).unwrap());
        let ls = run_ldecc(&CiSource::oracle(g.clone()), 6, LdeccOptions::default()).unwrap();
        assert_eq!(ls.neighbors(), g.neighbors(6));
        assert_eq!(ls.children, node_set([3, 4, 7]));
        assert_eq!(ls.unoriented, node_set([5]));
    }

    #[test]
    fn fig1_run() {
        let (g, src) = fig1();
        let id = |s| g.index_of(s).unwrap();
        let ls = run_ldecc(&src, id("X"), LdeccOptions::default()).unwrap();
        assert_eq!(ls.parents, node_set([id("W")]));
        assert_eq!(ls.children, node_set([id("M")]));
        assert!(ls.is_non_collider(id("W"), id("M")));
        assert!(ls
            .ecc_log
            .iter()
            .any(|e| (e.a, e.b) == (id("A"), id("B"))));
    }
}
