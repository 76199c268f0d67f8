use std::collections::BTreeMap;

use itertools::Itertools;

use super::{apply_meek_rules, Dag, Pdag, UnshieldedCollider};
use crate::NodeSet;

/// Structural quantities used to reason about test counts.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// Every unshielded collider with its minimal separator size.
    pub colliders: Vec<UnshieldedCollider>,
    /// For each parent `P` of the target, the colliders (indices into
    /// `colliders`) that orient `P -> X` on their own.
    pub poc: BTreeMap<usize, Vec<usize>>,
}

/// Size of the smallest set separating `a` and `b`, searching subsets of the
/// remaining nodes by increasing size. `None` when the pair is adjacent.
pub fn min_separator_size(g: &Dag, a: usize, b: usize) -> Option<usize> {
    if g.adjacent(a, b) {
        return None;
    }
    let rest: Vec<usize> = (0..g.n()).filter(|&v| v != a && v != b).collect();
    for size in 0..=rest.len() {
        for s in rest.iter().copied().combinations(size) {
            let s: NodeSet = s.into_iter().collect();
            if g.d_separated(a, b, &s).unwrap_or(false) {
                return Some(size);
            }
        }
    }
    None
}

/// Collider separator sizes and, for each parent of `x`, the colliders whose
/// Meek propagation in the true skeleton orients that parent's edge.
pub fn diagnostics(g: &Dag, x: usize) -> Diagnostics {
    let mut colliders = g.unshielded_colliders();
    for uc in &mut colliders {
        uc.sep_size = min_separator_size(g, uc.p, uc.q);
    }
    let skeleton = Pdag::skeleton_of(g);
    let mut poc: BTreeMap<usize, Vec<usize>> =
        g.parents(x).iter().map(|&p| (p, Vec::new())).collect();
    for (id, uc) in colliders.iter().enumerate() {
        let mut h = skeleton.clone();
        h.set_directed(uc.p, uc.r);
        h.set_directed(uc.q, uc.r);
        let h = apply_meek_rules(&h);
        for (&p, list) in poc.iter_mut() {
            if h.is_directed(p, x) {
                list.push(id);
            }
        }
    }
    Diagnostics { colliders, poc }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fig1_collider_needs_one_node() {
        let g = fixtures::fig1();
        let id = |s| g.index_of(s).unwrap();
        let d = diagnostics(&g, id("X"));
        let ucs: Vec<_> = d.colliders.iter().map(|u| (u.p, u.r, u.q, u.sep_size)).collect();
        assert!(ucs.contains(&(id("A"), id("W"), id("B"), Some(1))));
        let w_poc = &d.poc[&id("W")];
        assert!(w_poc
            .iter()
            .any(|&i| d.colliders[i].r == id("W")));
    }

    #[test]
    fn no_collider_no_entries() {
        let g = Dag::from_named_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let d = diagnostics(&g, 1);
        assert!(d.colliders.is_empty());
        assert!(d.poc.values().all(Vec::is_empty));
    }

    #[test]
    fn separator_family_has_size_m() {
        for m in 2..5 {
            let g = fixtures::fig5b(m, m + 1);
            let a = g.index_of("A").unwrap();
            let b = g.index_of("B").unwrap();
            assert_eq!(min_separator_size(&g, a, b), Some(m));
        }
    }
}
