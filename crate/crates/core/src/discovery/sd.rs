use std::collections::VecDeque;

use super::{local_pc_in_place, settle, LocalStructure};
use crate::ci::{find_markov_blanket, CiError, CiSource};
use crate::graph::{orient_with_known_separations, Pdag, SepSetMap};
use crate::NodeSet;

/// Sequential discovery outward from `x`: nodes are taken from a queue
/// seeded with `x`, each is pruned with local PC, its new neighbors are
/// queued, and after every step the subgraph induced by the processed nodes
/// is oriented. Neighbors of `x` not yet processed count as unoriented. Stops as soon as every neighbor of `x` is oriented.
///
/// With `mb_variant`, each node's candidate neighbors are first cut down to
/// its Markov blanket; dropped candidates are recorded as separated by that
/// blanket.
pub fn run_sd(src: &CiSource, x: usize, mb_variant: bool) -> Result<LocalStructure, CiError> {
    let mut ls = LocalStructure::new(x);
    let outcome = sd_loop(src, x, mb_variant, &mut ls);
    settle(outcome, ls, src)
}

fn sd_loop(
    src: &CiSource,
    x: usize,
    mb_variant: bool,
    ls: &mut LocalStructure,
) -> Result<(), CiError> {
    let mut u = Pdag::complete(&src.names());
    let mut dsep = SepSetMap::new();
    let mut queue = VecDeque::from([x]);
    let mut done = NodeSet::new();
    while let Some(v) = queue.pop_front() {
        if mb_variant {
            let mb = find_markov_blanket(src, v)?;
            for b in u.neighbors(v) {
                if !mb.contains(&b) {
                    u.remove_edge(v, b);
                    dsep.insert(v, b, mb.clone());
                }
            }
        }
        local_pc_in_place(src, &mut u, v, &mut dsep)?;
        done.insert(v);
        ls.visited.push(v);
        for b in u.neighbors(v) {
            if !done.contains(&b) && !queue.contains(&b) {
                queue.push_back(b);
            }
        }
        let explored = u.restricted(|a, b| done.contains(&a) && done.contains(&b));
        let orientation = orient_with_known_separations(&explored, &dsep);
        ls.absorb(&orientation, &u.neighbors(x), &dsep);
        if ls.unoriented.is_empty() {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::{fixtures, node_set};
    use std::sync::Arc;

    #[test]
    fn fig1_visit_order() {
        let g = Arc::new(fixtures::fig1());
        let id = |s| g.index_of(s).unwrap();
        let ls = run_sd(&CiSource::oracle(g.clone()), id("X"), false).unwrap();
        assert_eq!(ls.visited, ["X", "W", "M", "A", "B"].map(id).to_vec());
        assert_eq!(ls.parents, node_set([id("W")]));
        assert_eq!(ls.children, node_set([id("M")]));
    }

    #[test]
    fn lone_edge_stays_unoriented() {
        let g = Arc::new(Dag::from_named_edges(&["W", "X"], &[("W", "X")]).unwrap());
        let ls = run_sd(&CiSource::oracle(g), 1, false).unwrap();
        assert_eq!(ls.unoriented, node_set([0]));
        assert!(ls.parents.is_empty());
    }

    #[test]
    fn parent_provenance_names_the_collider() {
        let g = Arc::new(fixtures::fig1());
        let id = |s| g.index_of(s).unwrap();
        let ls = run_sd(&CiSource::oracle(g.clone()), id("X"), false).unwrap();
        let origins = &ls.parent_origins[&id("W")];
        assert_eq!(origins.len(), 1);
        let uc = ls.detected_colliders[*origins.iter().next().unwrap()];
        assert_eq!((uc.p, uc.r, uc.q), (id("A"), id("W"), id("B")));
    }

    #[test]
    fn cap_yields_partial_result() {
        let g = Arc::new(fixtures::fig1());
        let src = CiSource::oracle(g).with_cap(Some(3));
        let ls = run_sd(&src, 4, false).unwrap();
        assert!(ls.capped);
        assert_eq!(ls.tests_used, 3);
    }
}
