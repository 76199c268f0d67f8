use std::collections::{HashMap, VecDeque};

use super::GraphError;
use crate::NodeSet;

/// A directed acyclic graph over named nodes.
///
/// Parent and child lists are kept sorted so every derived query iterates in
/// canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Creates an edgeless DAG. Names must be unique.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, GraphError> {
        let mut index = HashMap::new();
        let mut owned = Vec::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            let n = n.as_ref().to_string();
            if index.insert(n.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n));
            }
            owned.push(n);
        }
        let len = owned.len();
        Ok(Self {
            names: owned,
            index,
            parents: vec![Vec::new(); len],
            children: vec![Vec::new(); len],
        })
    }

    /// Builds a DAG from names and `(parent, child)` index pairs.
    pub fn from_edges<S: AsRef<str>>(
        names: &[S],
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let mut g = Self::new(names)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Builds a DAG from `(parent, child)` name pairs.
    pub fn from_named_edges<S: AsRef<str>>(
        names: &[S],
        edges: &[(&str, &str)],
    ) -> Result<Self, GraphError> {
        let mut g = Self::new(names)?;
        for (a, b) in edges {
            let (a, b) = (g.require(a)?, g.require(b)?);
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        self.check(from)?;
        self.check(to)?;
        if from == to {
            return Err(GraphError::SelfLoop(self.names[from].clone()));
        }
        if self.adjacent(from, to) {
            return Err(GraphError::DuplicateEdge(
                self.names[from].clone(),
                self.names[to].clone(),
            ));
        }
        if self.is_ancestor(to, from) {
            return Err(GraphError::Cycle(
                self.names[from].clone(),
                self.names[to].clone(),
            ));
        }
        insert_sorted(&mut self.parents[to], from);
        insert_sorted(&mut self.children[from], to);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Looks a name up, failing with [`GraphError::UnknownNode`].
    pub fn require(&self, name: &str) -> Result<usize, GraphError> {
        self.index_of(name)
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn check(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::IndexOutOfRange(v))
        }
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.children[from].binary_search(&to).is_ok()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Edges as `(parent, child)` in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|a| self.children[a].iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn neighbors(&self, v: usize) -> NodeSet {
        self.parents[v]
            .iter()
            .chain(self.children[v].iter())
            .copied()
            .collect()
    }

    /// Strict descendants of `v`.
    pub fn descendants(&self, v: usize) -> NodeSet {
        self.reach(v, &self.children)
    }

    /// Strict ancestors of `v`.
    pub fn ancestors(&self, v: usize) -> NodeSet {
        self.reach(v, &self.parents)
    }

    /// `true` when `a` is a strict ancestor of `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        a != b && self.descendants(a).contains(&b)
    }

    /// Neighbors plus the other parents of every child.
    pub fn markov_blanket(&self, v: usize) -> NodeSet {
        let mut mb = self.neighbors(v);
        for &c in &self.children[v] {
            mb.extend(self.parents[c].iter().copied().filter(|&p| p != v));
        }
        mb
    }

    /// A topological order (Kahn's algorithm, smallest index first).
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..self.n()).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Unshielded colliders `p -> r <- q` in canonical order.
    pub fn unshielded_colliders(&self) -> Vec<super::UnshieldedCollider> {
        let mut out = Vec::new();
        for r in 0..self.n() {
            let pa = &self.parents[r];
            for (i, &p) in pa.iter().enumerate() {
                for &q in &pa[i + 1..] {
                    if !self.adjacent(p, q) {
                        out.push(super::UnshieldedCollider::new(p, r, q));
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// d-separation of `a` and `b` given `s`, by reachability over
    /// (node, direction) states.
    pub fn d_separated(&self, a: usize, b: usize, s: &NodeSet) -> Result<bool, GraphError> {
        self.check(a)?;
        self.check(b)?;
        for &v in s {
            self.check(v)?;
        }
        Ok(!self.d_connected(a, b, s))
    }

    fn d_connected(&self, a: usize, b: usize, s: &NodeSet) -> bool {
        let n = self.n();
        let mut conditioned = vec![false; n];
        let mut anc = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        for &v in s {
            conditioned[v] = true;
            if !anc[v] {
                anc[v] = true;
                stack.push(v);
            }
        }
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !anc[p] {
                    anc[p] = true;
                    stack.push(p);
                }
            }
        }
        // visited[2v] = reached travelling up (from a child), visited[2v+1] = down.
        let mut visited = vec![false; 2 * n];
        let mut queue = VecDeque::new();
        queue.push_back((a, true));
        while let Some((v, up)) = queue.pop_front() {
            let slot = 2 * v + usize::from(!up);
            if visited[slot] {
                continue;
            }
            visited[slot] = true;
            if v == b && !conditioned[v] {
                return true;
            }
            if up {
                if !conditioned[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, true));
                    }
                    for &c in &self.children[v] {
                        queue.push_back((c, false));
                    }
                }
            } else {
                if !conditioned[v] {
                    for &c in &self.children[v] {
                        queue.push_back((c, false));
                    }
                }
                if anc[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, true));
                    }
                }
            }
        }
        false
    }

    fn reach(&self, v: usize, next: &[Vec<usize>]) -> NodeSet {
        let mut seen = NodeSet::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &w in &next[u] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::node_set;

    fn chain() -> Dag {
        Dag::from_named_edges(&["X", "M", "Y"], &[("X", "M"), ("M", "Y")]).unwrap()
    }

    #[test]
    fn chain_blocked_by_mediator() {
        let g = chain();
        assert!(g.d_separated(0, 2, &node_set([1])).unwrap());
        assert!(!g.d_separated(0, 2, &NodeSet::new()).unwrap());
    }

    #[test]
    fn collider_opens_when_conditioned() {
        let g = Dag::from_named_edges(&["A", "W", "B"], &[("A", "W"), ("B", "W")]).unwrap();
        assert!(g.d_separated(0, 2, &NodeSet::new()).unwrap());
        assert!(!g.d_separated(0, 2, &node_set([1])).unwrap());
    }

    #[test]
    fn fig1_separations() {
        let g = fixtures::fig1();
        let id = |s| g.index_of(s).unwrap();
        let (a, b, c, x) = (id("A"), id("B"), id("C"), id("X"));
        assert!(g.d_separated(a, b, &node_set([c])).unwrap());
        assert!(!g.d_separated(a, b, &node_set([c, x])).unwrap());
        assert!(g.d_separated(id("W"), id("M"), &node_set([x])).unwrap());
    }

    #[test]
    fn rejects_cycles_and_duplicates() {
        let mut g = chain();
        assert!(matches!(g.add_edge(2, 0), Err(GraphError::Cycle(..))));
        assert!(matches!(g.add_edge(0, 1), Err(GraphError::DuplicateEdge(..))));
        assert!(matches!(g.add_edge(1, 1), Err(GraphError::SelfLoop(_))));
        assert!(Dag::new(&["A", "A"]).is_err());
    }

    #[test]
    fn unknown_node_errors() {
        let g = chain();
        assert!(g.d_separated(0, 9, &NodeSet::new()).is_err());
    }

    #[test]
    fn markov_blanket_includes_spouses() {
        let g = Dag::from_named_edges(&["X", "C", "D"], &[("X", "C"), ("D", "C")]).unwrap();
        assert_eq!(g.markov_blanket(0), node_set([1, 2]));
        let f = fixtures::fig1();
        let x = f.index_of("X").unwrap();
        let expect: NodeSet = ["W", "M"].iter().map(|n| f.index_of(n).unwrap()).collect();
        assert_eq!(f.markov_blanket(x), expect);
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = fixtures::fig1();
        let order = g.topological_order();
        let pos: Vec<usize> = {
            let mut p = vec![0; g.n()];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        for (a, b) in g.edges() {
            assert!(pos[a] < pos[b]);
        }
    }
}
