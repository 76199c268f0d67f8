use std::collections::{BTreeMap, BTreeSet};

use super::{GraphError, Pdag, SepSetMap, UnshieldedCollider};

/// Result of orienting a skeleton: the graph, the colliders that were
/// detected, and for every directed edge the colliders whose propagation
/// produced it (indices into `colliders`).
#[derive(Debug, Clone)]
pub struct Orientation {
    pub graph: Pdag,
    pub colliders: Vec<UnshieldedCollider>,
    pub provenance: BTreeMap<(usize, usize), BTreeSet<usize>>,
}

impl Orientation {
    /// Colliders credited with orienting `p -> x`.
    pub fn origins(&self, p: usize, x: usize) -> BTreeSet<usize> {
        self.provenance.get(&(p, x)).cloned().unwrap_or_default()
    }
}

/// Applies Meek's rules R1–R4 until no undirected edge changes.
pub fn apply_meek_rules(g: &Pdag) -> Pdag {
    let mut g = g.clone();
    let mut prov = BTreeMap::new();
    meek_closure(&mut g, &|_, _| true, &mut prov);
    g
}

/// Orients every unshielded triple `a -- c -- b` with `c` outside the
/// separating set of `a, b` as a collider, then applies Meek's rules.
pub fn get_cpdag(skeleton: &Pdag, dsep: &SepSetMap) -> Result<Pdag, GraphError> {
    orient(skeleton, dsep, true).map(|o| o.graph)
}

/// Like [`get_cpdag`] but only pairs with a recorded separating set count as
/// non-adjacent; pairs that are neither adjacent nor recorded are treated as
/// untested and never form an unshielded triple.
pub fn orient_with_known_separations(skeleton: &Pdag, dsep: &SepSetMap) -> Orientation {
    orient(skeleton, dsep, false).expect("lenient orientation cannot fail")
}

fn orient(skeleton: &Pdag, dsep: &SepSetMap, strict: bool) -> Result<Orientation, GraphError> {
    let mut g = skeleton.clone();
    let n = g.n();
    let known = |a: usize, b: usize| !skeleton.adjacent(a, b) && (strict || dsep.contains(a, b));
    let mut colliders = Vec::new();
    for r in 0..n {
        let nbrs: Vec<usize> = skeleton.neighbors(r).into_iter().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !known(a, b) {
                    continue;
                }
                let sep = match dsep.get(a, b) {
                    Some(s) => s,
                    None if strict => {
                        return Err(GraphError::MissingSepSet(
                            g.names()[a].clone(),
                            g.names()[b].clone(),
                        ))
                    }
                    None => continue,
                };
                if !sep.contains(&r) {
                    colliders.push(UnshieldedCollider::new(a, r, b));
                }
            }
        }
    }
    colliders.sort();
    let mut prov: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for (id, uc) in colliders.iter().enumerate() {
        for end in [uc.p, uc.q] {
            if g.is_undirected(end, uc.r) {
                g.set_directed(end, uc.r);
            }
            if g.is_directed(end, uc.r) {
                prov.entry((end, uc.r)).or_default().insert(id);
            }
        }
    }
    meek_closure(&mut g, &known, &mut prov);
    Ok(Orientation {
        graph: g,
        colliders,
        provenance: prov,
    })
}

type Provenance = BTreeMap<(usize, usize), BTreeSet<usize>>;

fn meek_closure(g: &mut Pdag, known_nonadj: &dyn Fn(usize, usize) -> bool, prov: &mut Provenance) {
    let n = g.n();
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in 0..n {
                if !g.is_undirected(a, b) {
                    continue;
                }
                if let Some(origin) = rule_fires(g, a, b, known_nonadj, prov) {
                    g.set_directed(a, b);
                    prov.insert((a, b), origin);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Checks whether some rule orients the undirected edge `a -- b` as `a -> b`.
fn rule_fires(
    g: &Pdag,
    a: usize,
    b: usize,
    known_nonadj: &dyn Fn(usize, usize) -> bool,
    prov: &Provenance,
) -> Option<BTreeSet<usize>> {
    let n = g.n();
    let nonadj = |u: usize, v: usize| u != v && !g.adjacent(u, v) && known_nonadj(u, v);
    let origin = |edges: &[(usize, usize)]| -> BTreeSet<usize> {
        edges
            .iter()
            .filter_map(|e| prov.get(e))
            .flat_map(|s| s.iter().copied())
            .collect()
    };
    // R1: c -> a -- b, c and b non-adjacent.
    for c in 0..n {
        if g.is_directed(c, a) && nonadj(c, b) {
            return Some(origin(&[(c, a)]));
        }
    }
    // R2: a -> c -> b.
    for c in 0..n {
        if g.is_directed(a, c) && g.is_directed(c, b) {
            return Some(origin(&[(a, c), (c, b)]));
        }
    }
    // R3: a -- c -> b, a -- d -> b, c and d non-adjacent.
    for c in 0..n {
        if !(g.is_undirected(a, c) && g.is_directed(c, b)) {
            continue;
        }
        for d in c + 1..n {
            if g.is_undirected(a, d) && g.is_directed(d, b) && nonadj(c, d) {
                return Some(origin(&[(c, b), (d, b)]));
            }
        }
    }
    // R4: a -- c -> d -> b, a adjacent to d, c and b non-adjacent.
    for c in 0..n {
        if !g.is_undirected(a, c) || !nonadj(c, b) {
            continue;
        }
        for d in 0..n {
            if g.is_directed(c, d) && g.is_directed(d, b) && g.adjacent(a, d) {
                return Some(origin(&[(c, d), (d, b)]));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeMark;
    use crate::{fixtures, node_set, NodeSet};

    fn pdag(names: &[&str], directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> Pdag {
        let mut g = Pdag::empty(names);
        for &(a, b) in directed {
            g.set_directed(a, b);
        }
        for &(a, b) in undirected {
            g.set_undirected(a, b);
        }
        g
    }

    #[test]
    fn rule_one() {
        let g = apply_meek_rules(&pdag(&["A", "B", "C"], &[(0, 1)], &[(1, 2)]));
        assert!(g.is_directed(1, 2));
    }

    #[test]
    fn rule_two() {
        let g = apply_meek_rules(&pdag(&["A", "B", "C"], &[(0, 1), (1, 2)], &[(0, 2)]));
        assert!(g.is_directed(0, 2));
    }

    #[test]
    fn rule_three() {
        // a -- c -> b, a -- d -> b, a -- b, c and d non-adjacent.
        let g = apply_meek_rules(&pdag(
            &["A", "B", "C", "D"],
            &[(2, 1), (3, 1)],
            &[(0, 2), (0, 3), (0, 1)],
        ));
        assert!(g.is_directed(0, 1));
    }

    #[test]
    fn fully_directed_is_fixed_point() {
        let g = Pdag::from_dag(&fixtures::fig1());
        assert_eq!(apply_meek_rules(&g), g);
    }

    #[test]
    fn canonical_collider() {
        let sk = pdag(&["A", "W", "B"], &[], &[(0, 1), (1, 2)]);
        let mut dsep = SepSetMap::new();
        dsep.insert(0, 2, NodeSet::new());
        let g = get_cpdag(&sk, &dsep).unwrap();
        assert!(g.is_directed(0, 1) && g.is_directed(2, 1));
    }

    #[test]
    fn triangle_stays_undirected() {
        let g = get_cpdag(&Pdag::complete(&["A", "B", "C"]), &SepSetMap::new()).unwrap();
        assert_eq!(g.undirected_edge_count(), 3);
    }

    #[test]
    fn missing_sepset_is_an_error() {
        let sk = pdag(&["A", "W", "B"], &[], &[(0, 1), (1, 2)]);
        assert!(matches!(
            get_cpdag(&sk, &SepSetMap::new()),
            Err(GraphError::MissingSepSet(..))
        ));
    }

    #[test]
    fn unrecorded_pairs_form_no_triple() {
        let sk = pdag(&["A", "W", "B"], &[], &[(0, 1), (1, 2)]);
        let o = orient_with_known_separations(&sk, &SepSetMap::new());
        assert_eq!(o.graph.undirected_edge_count(), 2);
        assert!(o.colliders.is_empty());
    }

    #[test]
    fn provenance_follows_propagation() {
        // A -> C <- B, C -- D, D -- X: D and X inherit the collider.
        let sk = pdag(&["A", "B", "C", "D", "X"], &[], &[(0, 2), (1, 2), (2, 3), (3, 4)]);
        let mut dsep = SepSetMap::new();
        for (a, b, s) in [(0, 1, vec![]), (0, 3, vec![2]), (1, 3, vec![2]), (2, 4, vec![3]),
                          (0, 4, vec![2]), (1, 4, vec![2])] {
            dsep.insert(a, b, node_set(s));
        }
        let o = orient_with_known_separations(&sk, &dsep);
        assert_eq!(o.colliders.len(), 1);
        assert!(o.graph.is_directed(3, 4));
        assert_eq!(o.origins(3, 4), node_set([0]));
    }

    #[test]
    fn fig1_cpdag_from_exact_separations() {
        let dag = fixtures::fig1();
        let g = crate::graph::mec::cpdag_of(&dag);
        let id = |s: &str| dag.index_of(s).unwrap();
        assert!(g.is_directed(id("A"), id("W")));
        assert!(g.is_directed(id("B"), id("W")));
        assert!(g.is_directed(id("W"), id("X")));
        assert!(g.is_directed(id("X"), id("M")));
        assert!(g.is_undirected(id("C"), id("A")));
        assert!(g.is_undirected(id("C"), id("B")));
        let directed = g.edges().iter().filter(|e| e.2 == EdgeMark::Directed).count();
        assert_eq!(directed, 6);
    }
}
