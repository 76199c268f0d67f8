//! Brute-force reference implementations used as test oracles. Everything
//! here enumerates paths or graphs directly and shares no code with the
//! library beyond the `Dag`/`Pdag` containers.

#![allow(dead_code)]

use std::collections::BTreeSet;

use lcd_core::graph::{cpdag_of, enumerate_mec, Dag, EdgeMark, Pdag};
use lcd_core::NodeSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random DAG on `n` nodes named `V0..`: each forward pair of a random
/// permutation gets an edge with probability `p`.
pub fn random_dag(seed: u64, n: usize, p: f64) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut g = Dag::new(&names).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_edge(order[i], order[j]).unwrap();
            }
        }
    }
    g
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn descendants_incl(g: &Dag, v: usize) -> NodeSet {
    let mut seen = NodeSet::from([v]);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for &c in g.children(u) {
            if seen.insert(c) {
                stack.push(c);
            }
        }
    }
    seen
}

/// d-separation by enumerating every simple path between `a` and `b`.
pub fn dsep_by_paths(g: &Dag, a: usize, b: usize, z: &NodeSet) -> bool {
    let n = g.n();
    let desc: Vec<NodeSet> = (0..n).map(|v| descendants_incl(g, v)).collect();
    let mut path = vec![a];
    let mut on = vec![false; n];
    on[a] = true;
    !active_path(g, b, z, &desc, &mut path, &mut on)
}

fn active_path(
    g: &Dag,
    b: usize,
    z: &NodeSet,
    desc: &[NodeSet],
    path: &mut Vec<usize>,
    on: &mut [bool],
) -> bool {
    let last = *path.last().unwrap();
    if last == b {
        return path_is_open(g, path, z, desc);
    }
    for w in g.neighbors(last) {
        if on[w] {
            continue;
        }
        path.push(w);
        on[w] = true;
        let open = active_path(g, b, z, desc, path, on);
        on[w] = false;
        path.pop();
        if open {
            return true;
        }
    }
    false
}

fn path_is_open(g: &Dag, path: &[usize], z: &NodeSet, desc: &[NodeSet]) -> bool {
    for i in 1..path.len().saturating_sub(1) {
        let (p, m, q) = (path[i - 1], path[i], path[i + 1]);
        let collider = g.has_edge(p, m) && g.has_edge(q, m);
        if collider {
            if desc[m].is_disjoint(z) {
                return false;
            }
        } else if z.contains(&m) {
            return false;
        }
    }
    true
}

pub fn mec(g: &Dag) -> Vec<Dag> {
    enumerate_mec(&cpdag_of(g)).unwrap()
}

/// `{Pa(x; G) : G in MEC(g)}`.
pub fn mec_parent_sets(g: &Dag, x: usize) -> BTreeSet<NodeSet> {
    mec(g)
        .iter()
        .map(|d| d.parents(x).iter().copied().collect())
        .collect()
}

/// Copy of `g` without the edges leaving `x`.
fn without_out_edges(g: &Dag, x: usize) -> Dag {
    let edges: Vec<(usize, usize)> = g.edges().into_iter().filter(|&(a, _)| a != x).collect();
    Dag::from_edges(g.names(), &edges).unwrap()
}

/// Backdoor criterion in one DAG: no descendant of `x` in `z`, and `z`
/// blocks every path into `x` (d-separation once `x`'s out-edges go).
pub fn backdoor_valid(g: &Dag, x: usize, y: usize, z: &NodeSet) -> bool {
    if !descendants_incl(g, x).is_disjoint(z) || z.contains(&y) {
        return false;
    }
    dsep_by_paths(&without_out_edges(g, x), x, y, z)
}

/// Backdoor validity in every DAG of the class.
pub fn backdoor_valid_in_mec(dags: &[Dag], x: usize, y: usize, z: &NodeSet) -> bool {
    dags.iter().all(|d| backdoor_valid(d, x, y, z))
}

/// Every subset of `items`.
pub fn subsets(items: &[usize]) -> Vec<NodeSet> {
    (0..1u32 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// Some subset of `V \ {x, y}` valid in every DAG of the class.
pub fn exists_valid_adjustment(dags: &[Dag], x: usize, y: usize) -> bool {
    let n = dags[0].n();
    let others: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
    subsets(&others)
        .iter()
        .any(|z| backdoor_valid_in_mec(dags, x, y, z))
}

/// Can the CPDAG edge between `a` and `b` be traversed from `a` to `b`
/// without going against an arrow.
fn forward_ok(c: &Pdag, a: usize, b: usize) -> bool {
    c.is_directed(a, b) || c.is_undirected(a, b)
}

/// All possibly causal paths from `x` to `y` that visit `x` only at the
/// start: consecutive edges point forward or are undirected and no edge
/// between path nodes points backward.
fn possibly_causal_paths(c: &Pdag, x: usize, y: usize) -> Vec<Vec<usize>> {
    fn walk(c: &Pdag, y: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if last == y {
            out.push(path.clone());
            return;
        }
        for w in c.neighbors(last) {
            if path.contains(&w) || !forward_ok(c, last, w) {
                continue;
            }
            if path.iter().any(|&u| c.is_directed(w, u)) {
                continue;
            }
            path.push(w);
            walk(c, y, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(c, y, &mut vec![x], &mut out);
    out
}

/// Nodes reachable from `v` along possibly causal paths, `v` included.
fn possible_descendants_cpdag(c: &Pdag, v: usize) -> NodeSet {
    (0..c.n())
        .filter(|&w| w == v || !possibly_causal_paths(c, v, w).is_empty())
        .collect()
}

/// `Pa(posscn(x, y)) \ forb(x, y)` on the CPDAG of `g`, with `Pa` the
/// directed parents in the CPDAG.
pub fn optimal_set_cpdag(g: &Dag, x: usize, y: usize) -> NodeSet {
    let c = cpdag_of(g);
    let posscn: NodeSet = possibly_causal_paths(&c, x, y)
        .into_iter()
        .flat_map(|p| p.into_iter().skip(1))
        .collect();
    let mut forb = NodeSet::from([x]);
    for &v in &posscn {
        forb.extend(possible_descendants_cpdag(&c, v));
    }
    posscn
        .iter()
        .flat_map(|&v| c.parents(v))
        .filter(|p| !forb.contains(p))
        .collect()
}

/// Is `x` an ancestor of `y` in some DAG of the class.
pub fn possibly_causal(dags: &[Dag], x: usize, y: usize) -> bool {
    dags.iter().any(|d| d.is_ancestor(x, y))
}

/// Descendants of `x` (excluded) in any DAG of the class.
pub fn union_descendants(dags: &[Dag], x: usize) -> NodeSet {
    let mut out = NodeSet::new();
    for d in dags {
        let mut de = descendants_incl(d, x);
        de.remove(&x);
        out.extend(de);
    }
    out
}

/// Undirected edges of a CPDAG, for sanity checks.
pub fn undirected_edges(c: &Pdag) -> usize {
    c.edges()
        .iter()
        .filter(|(_, _, m)| *m == EdgeMark::Undirected)
        .count()
}

/// Coefficient of determination of a least-squares polynomial fit.
pub fn poly_r2(xs: &[f64], ys: &[f64], degree: usize) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let design = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32));
    let y = DVector::from_row_slice(ys);
    let beta = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .unwrap();
    let fit = &design * beta;
    let mean = y.mean();
    let ss_res: f64 = (&y - fit).iter().map(|r| r * r).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}
