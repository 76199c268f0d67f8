use serde::Serialize;

use crate::ci::{CiError, CiSource};
use crate::discovery::{get_mns, LocalStructure, MnsResult};
use crate::NodeSet;

/// Outcome of the generalized backdoor check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GbcReport {
    pub valid: bool,
    pub poss_desc: NodeSet,
    /// The neighbor of `x` still dependent on `y`, when that is why the
    /// check failed.
    pub failing_witness: Option<usize>,
}

/// Optimal adjustment set, or the absence of any valid one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum OptimalSet {
    Set(NodeSet),
    NoValidAdj,
}

/// Possible descendants of the target from local information: its children
/// and unoriented neighbors, nodes with no minimal neighbor separator, and
/// nodes whose separator meets the children or unoriented neighbors.
pub fn possible_descendants(src: &CiSource, ls: &LocalStructure) -> Result<NodeSet, CiError> {
    let x = ls.target;
    let ne = ls.neighbors();
    let m: NodeSet = ls.children.union(&ls.unoriented).copied().collect();
    let mut out = m.clone();
    for v in 0..src.n() {
        if v == x || ne.contains(&v) {
            continue;
        }
        match get_mns(src, x, &ne, v)? {
            MnsResult::NotFound => {
                out.insert(v);
            }
            MnsResult::Found(s) => {
                if !s.is_disjoint(&m) {
                    out.insert(v);
                }
            }
        }
    }
    Ok(out)
}

fn reject_endpoints(x: usize, y: usize, z: &NodeSet) -> Result<(), CiError> {
    if z.contains(&x) || z.contains(&y) {
        return Err(CiError::InvalidQuery(
            "adjustment set contains the treatment or outcome".into(),
        ));
    }
    Ok(())
}

/// First member of `(Pa(X) ∪ Uo(X)) \ z` not separated from `y` by
/// `{x} ∪ z`. The outcome itself always counts as unseparated.
fn open_neighbor(
    src: &CiSource,
    ls: &LocalStructure,
    y: usize,
    z: &NodeSet,
) -> Result<Option<usize>, CiError> {
    let x = ls.target;
    let mut cond = z.clone();
    cond.insert(x);
    for &q in ls.parents.union(&ls.unoriented) {
        if z.contains(&q) {
            continue;
        }
        if q == y || !src.independent(q, y, &cond)? {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// Whether `z` satisfies the backdoor criterion relative to `(x, y)` in
/// every DAG of the equivalence class, decided from the local structure and
/// extra CI queries.
pub fn check_gbc(
    src: &CiSource,
    ls: &LocalStructure,
    y: usize,
    z: &NodeSet,
) -> Result<GbcReport, CiError> {
    reject_endpoints(ls.target, y, z)?;
    let poss_desc = possible_descendants(src, ls)?;
    if !z.is_disjoint(&poss_desc) {
        return Ok(GbcReport {
            valid: false,
            poss_desc,
            failing_witness: None,
        });
    }
    let witness = open_neighbor(src, ls, y, z)?;
    Ok(GbcReport {
        valid: witness.is_none(),
        poss_desc,
        failing_witness: witness,
    })
}

/// Starts from every node that is not a possible descendant, prunes nodes
/// separated from `y` given `x` and the rest in one pass in canonical
/// order, and verifies the result with the backdoor check.
pub fn optimal_adjustment_set(
    src: &CiSource,
    ls: &LocalStructure,
    y: usize,
) -> Result<OptimalSet, CiError> {
    let x = ls.target;
    let poss_desc = possible_descendants(src, ls)?;
    let z: NodeSet = (0..src.n())
        .filter(|v| *v != x && *v != y && !poss_desc.contains(v))
        .collect();
    let mut kept = z.clone();
    for &v in &z {
        let mut cond = kept.clone();
        cond.remove(&v);
        cond.insert(x);
        if src.independent(y, v, &cond)? {
            kept.remove(&v);
        }
    }
    if open_neighbor(src, ls, y, &kept)?.is_some() {
        return Ok(OptimalSet::NoValidAdj);
    }
    Ok(OptimalSet::Set(kept))
}
