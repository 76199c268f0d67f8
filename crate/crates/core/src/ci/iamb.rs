use super::{CiError, CiSource};
use crate::NodeSet;

/// Markov blanket of `x` by incremental association: a forward pass that
/// adds every node still dependent on `x` given the growing blanket,
/// repeated until stable, then a backward pass removing false positives.
pub fn find_markov_blanket(src: &CiSource, x: usize) -> Result<NodeSet, CiError> {
    find_markov_blanket_within(src, x, (0..src.n()).filter(|&v| v != x))
}

/// Same as [`find_markov_blanket`] with candidates limited to `candidates`.
pub fn find_markov_blanket_within<I: IntoIterator<Item = usize>>(
    src: &CiSource,
    x: usize,
    candidates: I,
) -> Result<NodeSet, CiError> {
    let candidates: Vec<usize> = candidates.into_iter().filter(|&v| v != x).collect();
    let mut mb = NodeSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for &v in &candidates {
            if mb.contains(&v) {
                continue;
            }
            if !src.independent(v, x, &mb)? {
                mb.insert(v);
                changed = true;
            }
        }
    }
    let snapshot: Vec<usize> = mb.iter().copied().collect();
    for v in snapshot {
        let mut rest = mb.clone();
        rest.remove(&v);
        if src.independent(v, x, &rest)? {
            mb.remove(&v);
        }
    }
    Ok(mb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::{fixtures, node_set};
    use std::sync::Arc;

    #[test]
    fn fig1_blanket() {
        let g = Arc::new(fixtures::fig1());
        let src = CiSource::oracle(g.clone());
        let id = |s| g.index_of(s).unwrap();
        let mb = find_markov_blanket(&src, id("X")).unwrap();
        assert_eq!(mb, node_set([id("W"), id("M")]));
        assert_eq!(mb, g.markov_blanket(id("X")));
    }

    #[test]
    fn isolated_node_has_empty_blanket() {
        let g = Arc::new(Dag::from_named_edges(&["X", "A", "B"], &[("A", "B")]).unwrap());
        let src = CiSource::oracle(g);
        assert!(find_markov_blanket(&src, 0).unwrap().is_empty());
    }

    #[test]
    fn spouse_is_included() {
        let g = Arc::new(Dag::from_named_edges(&["X", "C", "D"], &[("X", "C"), ("D", "C")]).unwrap());
        let src = CiSource::oracle(g);
        assert_eq!(find_markov_blanket(&src, 0).unwrap(), node_set([1, 2]));
    }
}
