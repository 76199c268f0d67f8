use super::{apply_meek_rules, Dag, GraphError, Pdag};

/// Largest graph accepted by [`enumerate_mec`].
pub const MEC_NODE_LIMIT: usize = 12;

/// CPDAG of a DAG: its skeleton with the unshielded colliders oriented,
/// closed under Meek's rules.
pub fn cpdag_of(dag: &Dag) -> Pdag {
    let mut g = Pdag::skeleton_of(dag);
    for uc in dag.unshielded_colliders() {
        g.set_directed(uc.p, uc.r);
        g.set_directed(uc.q, uc.r);
    }
    apply_meek_rules(&g)
}

/// All DAGs in the equivalence class represented by `cpdag`, found by
/// orienting undirected edges one at a time and pruning branches that
/// create a cycle or a new unshielded collider.
pub fn enumerate_mec(cpdag: &Pdag) -> Result<Vec<Dag>, GraphError> {
    if cpdag.n() > MEC_NODE_LIMIT {
        return Err(GraphError::TooLarge {
            n: cpdag.n(),
            limit: MEC_NODE_LIMIT,
        });
    }
    let undirected: Vec<(usize, usize)> = cpdag
        .edges()
        .into_iter()
        .filter(|e| e.2 == super::EdgeMark::Undirected)
        .map(|e| (e.0, e.1))
        .collect();
    let mut out = Vec::new();
    let mut g = cpdag.clone();
    extend(&mut g, &undirected, 0, &mut out)?;
    if out.is_empty() {
        return Err(GraphError::NoExtension);
    }
    Ok(out)
}

fn extend(
    g: &mut Pdag,
    edges: &[(usize, usize)],
    i: usize,
    out: &mut Vec<Dag>,
) -> Result<(), GraphError> {
    if i == edges.len() {
        if g.directed_part_acyclic() {
            out.push(g.to_dag()?);
        }
        return Ok(());
    }
    let (a, b) = edges[i];
    for (from, to) in [(a, b), (b, a)] {
        g.set_directed(from, to);
        if !creates_new_collider(g, from, to) && g.directed_part_acyclic() {
            extend(g, edges, i + 1, out)?;
        }
        g.set_undirected(a, b);
    }
    Ok(())
}

/// A freshly oriented `from -> to` creates a collider with any other parent
/// of `to` that is not adjacent to `from`.
fn creates_new_collider(g: &Pdag, from: usize, to: usize) -> bool {
    g.parents(to)
        .into_iter()
        .any(|p| p != from && !g.adjacent(p, from))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn single_edge_has_two_members() {
        let mut g = Pdag::empty(&["X", "Y"]);
        g.set_undirected(0, 1);
        assert_eq!(enumerate_mec(&g).unwrap().len(), 2);
    }

    #[test]
    fn oriented_collider_has_one_member() {
        let dag = Dag::from_named_edges(&["A", "W", "B"], &[("A", "W"), ("B", "W")]).unwrap();
        assert_eq!(enumerate_mec(&cpdag_of(&dag)).unwrap().len(), 1);
    }

    #[test]
    fn chain_has_three_members() {
        let dag = Dag::from_named_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let members = enumerate_mec(&cpdag_of(&dag)).unwrap();
        assert_eq!(members.len(), 3);
        // the collider orientation is excluded
        assert!(members
            .iter()
            .all(|m| !(m.has_edge(0, 1) && m.has_edge(2, 1))));
    }

    #[test]
    fn fig1_class_contains_truth() {
        let dag = fixtures::fig1();
        let members = enumerate_mec(&cpdag_of(&dag)).unwrap();
        assert!(members.contains(&dag));
        // only the C--A, C--B edges vary and the collider at C is excluded
        assert_eq!(members.len(), 3);
    }

    #[test]
    fn size_guard() {
        let names: Vec<String> = (0..13).map(|i| format!("V{i}")).collect();
        assert!(matches!(
            enumerate_mec(&Pdag::empty(&names)),
            Err(GraphError::TooLarge { .. })
        ));
    }
}
