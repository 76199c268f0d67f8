use std::collections::BTreeMap;

use crate::NodeSet;

/// Separating sets keyed by unordered node pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepSetMap {
    inner: BTreeMap<(usize, usize), NodeSet>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SepSetMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: usize, b: usize, s: NodeSet) {
        self.inner.insert(key(a, b), s);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&NodeSet> {
        self.inner.get(&key(a, b))
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.inner.contains_key(&key(a, b))
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    /// Entries in canonical pair order.
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &NodeSet)> {
        self.inner.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node_set;

    #[test]
    fn pair_order_is_irrelevant() {
        let mut m = SepSetMap::new();
        m.insert(3, 1, node_set([2]));
        assert_eq!(m.get(1, 3), Some(&node_set([2])));
        assert!(m.contains(3, 1));
        assert!(!m.contains(1, 2));
    }
}
