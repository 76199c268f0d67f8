use super::{Dag, GraphError};
use crate::NodeSet;

/// Mark on an edge of a partially directed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeMark {
    Directed,
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Empty,
    Undirected,
    /// Row node points at column node.
    Out,
    /// Column node points at row node.
    In,
}

/// A partially directed graph stored as a dense mark matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pdag {
    names: Vec<String>,
    cells: Vec<Cell>,
}

impl Pdag {
    pub fn empty<S: AsRef<str>>(names: &[S]) -> Self {
        let n = names.len();
        Self {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            cells: vec![Cell::Empty; n * n],
        }
    }

    /// Complete undirected graph.
    pub fn complete<S: AsRef<str>>(names: &[S]) -> Self {
        let mut g = Self::empty(names);
        for a in 0..g.n() {
            for b in a + 1..g.n() {
                g.set_undirected(a, b);
            }
        }
        g
    }

    /// Undirected skeleton of a DAG.
    pub fn skeleton_of(dag: &Dag) -> Self {
        let mut g = Self::empty(dag.names());
        for (a, b) in dag.edges() {
            g.set_undirected(a, b);
        }
        g
    }

    /// The DAG itself as a fully directed graph.
    pub fn from_dag(dag: &Dag) -> Self {
        let mut g = Self::empty(dag.names());
        for (a, b) in dag.edges() {
            g.set_directed(a, b);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn at(&self, a: usize, b: usize) -> Cell {
        self.cells[a * self.n() + b]
    }

    fn put(&mut self, a: usize, b: usize, c: Cell) {
        let n = self.n();
        self.cells[a * n + b] = c;
        self.cells[b * n + a] = match c {
            Cell::Out => Cell::In,
            Cell::In => Cell::Out,
            other => other,
        };
    }

    pub fn set_undirected(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        self.put(a, b, Cell::Undirected);
    }

    pub fn set_directed(&mut self, from: usize, to: usize) {
        debug_assert_ne!(from, to);
        self.put(from, to, Cell::Out);
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.put(a, b, Cell::Empty);
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b && self.at(a, b) != Cell::Empty
    }

    pub fn is_undirected(&self, a: usize, b: usize) -> bool {
        a != b && self.at(a, b) == Cell::Undirected
    }

    /// `true` when `from -> to` is present.
    pub fn is_directed(&self, from: usize, to: usize) -> bool {
        from != to && self.at(from, to) == Cell::Out
    }

    /// All adjacent nodes regardless of mark.
    pub fn neighbors(&self, v: usize) -> NodeSet {
        (0..self.n()).filter(|&u| self.adjacent(v, u)).collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> NodeSet {
        (0..self.n()).filter(|&u| self.is_undirected(v, u)).collect()
    }

    /// Nodes with a directed edge into `v`.
    pub fn parents(&self, v: usize) -> NodeSet {
        (0..self.n()).filter(|&u| self.is_directed(u, v)).collect()
    }

    /// Nodes `v` points at.
    pub fn children(&self, v: usize) -> NodeSet {
        (0..self.n()).filter(|&u| self.is_directed(v, u)).collect()
    }

    /// Edges as `(a, b, mark)`; directed edges read `a -> b`, undirected
    /// ones have `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize, EdgeMark)> {
        let mut out = Vec::new();
        for a in 0..self.n() {
            for b in 0..self.n() {
                match self.at(a, b) {
                    Cell::Out => out.push((a, b, EdgeMark::Directed)),
                    Cell::Undirected if a < b => out.push((a, b, EdgeMark::Undirected)),
                    _ => {}
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.edges()
            .iter()
            .filter(|e| e.2 == EdgeMark::Undirected)
            .count()
    }

    /// Same node set, keeping only edges whose endpoints both satisfy `keep`.
    pub fn restricted(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let mut g = Self::empty(&self.names);
        for a in 0..self.n() {
            for b in a + 1..self.n() {
                if self.at(a, b) != Cell::Empty && keep(a, b) {
                    let c = self.at(a, b);
                    g.put(a, b, c);
                }
            }
        }
        g
    }

    /// `true` when the directed part contains no cycle.
    pub fn directed_part_acyclic(&self) -> bool {
        let n = self.n();
        let mut indeg = vec![0usize; n];
        for a in 0..n {
            for b in 0..n {
                if self.is_directed(a, b) {
                    indeg[b] += 1;
                }
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for u in 0..n {
                if self.is_directed(v, u) {
                    indeg[u] -= 1;
                    if indeg[u] == 0 {
                        stack.push(u);
                    }
                }
            }
        }
        seen == n
    }

    /// Converts a fully directed graph into a [`Dag`].
    pub fn to_dag(&self) -> Result<Dag, GraphError> {
        let mut g = Dag::new(&self.names)?;
        for (a, b, mark) in self.edges() {
            if mark == EdgeMark::Undirected {
                return Err(GraphError::NoExtension);
            }
            g.add_edge(a, b)?;
        }
        Ok(g)
    }
}
