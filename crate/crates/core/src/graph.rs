//! Mutable simple unweighted digraph.

use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use crate::error::{Error, Result};

/// Out-degree above which a node's neighbour positions are indexed by a hash map.
pub const HASH_THRESHOLD: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    #[inline]
    pub const fn new(index: usize) -> Self {
        NodeId(index as u32)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub(crate) const fn raw(self) -> u32 {
        self.0
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId::new(i)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
}

impl Edge {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.from, self.to)
    }
}

/// One side of the adjacency structure: neighbour lists in insertion order
/// (modulo swap-removes) plus an optional position index per node.
#[derive(Clone, Debug, Default)]
struct Adjacency {
    lists: Vec<Vec<NodeId>>,
    positions: Vec<Option<HashMap<NodeId, u32>>>,
}

impl Adjacency {
    fn with_nodes(n: usize) -> Self {
        Adjacency {
            lists: (0..n).map(|_| Vec::new()).collect(),
            positions: (0..n).map(|_| None).collect(),
        }
    }

    fn position(&self, node: NodeId, target: NodeId) -> Option<usize> {
        let i = node.index();
        match &self.positions[i] {
            Some(map) => map.get(&target).map(|&p| p as usize),
            None => self.lists[i].iter().position(|&t| t == target),
        }
    }

    fn push(&mut self, node: NodeId, target: NodeId) {
        let i = node.index();
        let list = &mut self.lists[i];
        list.push(target);
        match &mut self.positions[i] {
            Some(map) => {
                map.insert(target, (list.len() - 1) as u32);
            }
            None if list.len() > HASH_THRESHOLD => {
                let map = list
                    .iter()
                    .enumerate()
                    .map(|(p, &t)| (t, p as u32))
                    .collect();
                self.positions[i] = Some(map);
            }
            None => {}
        }
    }

    fn remove_at(&mut self, node: NodeId, pos: usize) {
        let i = node.index();
        let list = &mut self.lists[i];
        let removed = list.swap_remove(pos);
        if let Some(map) = &mut self.positions[i] {
            map.remove(&removed);
            if let Some(&moved) = list.get(pos) {
                map.insert(moved, pos as u32);
            }
            // Hysteresis: drop the index well below the threshold.
            if list.len() <= HASH_THRESHOLD / 2 {
                self.positions[i] = None;
            }
        }
    }
}

/// Simple digraph over a fixed node set `0..n`.
///
/// `d_i` is the out-degree; `N⁺_i`/`N⁻_i` are [`Digraph::out_neighbors`] and
/// [`Digraph::in_neighbors`]. Neighbour order is unspecified.
#[derive(Clone, Debug, Default)]
pub struct Digraph {
    out: Adjacency,
    inc: Adjacency,
    edge_count: usize,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        assert!(n < u32::MAX as usize, "node count exceeds u32 range");
        Digraph {
            out: Adjacency::with_nodes(n),
            inc: Adjacency::with_nodes(n),
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge iterator, failing on the first invalid edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<(usize, usize)>,
    {
        let mut g = Digraph::new(n);
        for e in edges {
            let (u, v) = e.into();
            g.insert_edge(Edge::new(u, v))?;
        }
        Ok(g)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.out.lists.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn out_degree(&self, i: NodeId) -> usize {
        self.out.lists[i.index()].len()
    }

    #[inline]
    pub fn in_degree(&self, i: NodeId) -> usize {
        self.inc.lists[i.index()].len()
    }

    #[inline]
    pub fn out_neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.out.lists[i.index()]
    }

    #[inline]
    pub fn in_neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.inc.lists[i.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::new)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.nodes().flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .map(move |&v| Edge { from: u, to: v })
        })
    }

    pub fn check_node(&self, i: NodeId) -> Result<()> {
        if i.index() < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: i.index(),
                n: self.node_count(),
            })
        }
    }

    /// Expected `O(1)` membership test for `(from, to)`.
    #[inline]
    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        from.index() < self.node_count() && self.out.position(from, to).is_some()
    }

    pub fn insert_edge(&mut self, e: Edge) -> Result<()> {
        self.check_node(e.from)?;
        self.check_node(e.to)?;
        if e.from == e.to {
            return Err(Error::SelfLoop(e.from));
        }
        if self.has_edge(e.from, e.to) {
            return Err(Error::EdgeExists(e));
        }
        self.out.push(e.from, e.to);
        self.inc.push(e.to, e.from);
        self.edge_count += 1;
        Ok(())
    }

    pub fn delete_edge(&mut self, e: Edge) -> Result<()> {
        self.check_node(e.from)?;
        self.check_node(e.to)?;
        let out_pos = self
            .out
            .position(e.from, e.to)
            .ok_or(Error::EdgeNotFound(e))?;
        let in_pos = self
            .inc
            .position(e.to, e.from)
            .expect("in/out adjacency out of sync");
        self.out.remove_at(e.from, out_pos);
        self.inc.remove_at(e.to, in_pos);
        self.edge_count -= 1;
        Ok(())
    }

    /// Product of `(1 + d_i)`: the number of root-or-out-edge assignments,
    /// an upper bound on the number of spanning converging forests.
    pub fn assignment_space(&self) -> u128 {
        self.nodes()
            .map(|i| 1 + self.out_degree(i) as u128)
            .fold(1u128, |acc, x| acc.saturating_mul(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use proptest::prelude::*;

    fn cycle3() -> Digraph {
        Digraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn three_cycle_counts() {
        let g = cycle3();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_edge(NodeId::new(2), NodeId::new(0)));
        assert!(!g.has_edge(NodeId::new(0), NodeId::new(2)));
    }

    #[test]
    fn insert_updates_degree() {
        let mut g = cycle3();
        g.insert_edge(Edge::new(0, 2)).unwrap();
        assert_eq!(g.out_degree(NodeId::new(0)), 2);
        assert_eq!(g.in_degree(NodeId::new(2)), 2);
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn insert_rejects_duplicate_and_self_loop() {
        let mut g = cycle3();
        assert_eq!(
            g.insert_edge(Edge::new(0, 1)),
            Err(Error::EdgeExists(Edge::new(0, 1)))
        );
        assert_eq!(
            g.insert_edge(Edge::new(0, 0)),
            Err(Error::SelfLoop(NodeId::new(0)))
        );
        assert!(matches!(
            g.insert_edge(Edge::new(0, 7)),
            Err(Error::NodeOutOfRange { node: 7, n: 3 })
        ));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn delete_and_reinsert() {
        let mut g = cycle3();
        g.delete_edge(Edge::new(2, 0)).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(
            g.delete_edge(Edge::new(0, 2)),
            Err(Error::EdgeNotFound(Edge::new(0, 2)))
        );
        g.insert_edge(Edge::new(2, 0)).unwrap();
        let edges: BTreeSet<_> = g.edges().collect();
        let orig: BTreeSet<_> = cycle3().edges().collect();
        assert_eq!(edges, orig);
    }

    #[test]
    fn hashed_adjacency_survives_swap_removes() {
        let n = 40;
        let mut g = Digraph::new(n);
        for v in 1..n {
            g.insert_edge(Edge::new(0, v)).unwrap();
        }
        assert!(g.out.positions[0].is_some());
        for v in (1..n).step_by(3) {
            g.delete_edge(Edge::new(0, v)).unwrap();
        }
        for v in 1..n {
            assert_eq!(g.has_edge(NodeId::new(0), NodeId::new(v)), v % 3 != 1);
        }
        for v in 1..n {
            let _ = g.delete_edge(Edge::new(0, v));
        }
        assert_eq!(g.out_degree(NodeId::new(0)), 0);
        assert!(g.out.positions[0].is_none());
    }

    #[derive(Debug, Clone)]
    enum Op {
        Insert(usize, usize),
        Delete(usize, usize),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0..12usize, 0..12usize).prop_map(|(u, v)| Op::Insert(u, v)),
            (0..12usize, 0..12usize).prop_map(|(u, v)| Op::Delete(u, v)),
        ]
    }

    proptest! {
        #[test]
        fn adjacency_matches_pair_set(ops in proptest::collection::vec(op(), 0..400)) {
            let n = 12;
            let mut g = Digraph::new(n);
            let mut model = BTreeSet::new();
            for op in ops {
                match op {
                    Op::Insert(u, v) => {
                        let r = g.insert_edge(Edge::new(u, v));
                        if u == v {
                            prop_assert!(r.is_err());
                        } else {
                            prop_assert_eq!(r.is_ok(), model.insert((u, v)));
                        }
                    }
                    Op::Delete(u, v) => {
                        let r = g.delete_edge(Edge::new(u, v));
                        prop_assert_eq!(r.is_ok(), model.remove(&(u, v)));
                    }
                }
            }
            prop_assert_eq!(g.edge_count(), model.len());
            let mut outs = 0;
            let mut ins = 0;
            for i in g.nodes() {
                outs += g.out_degree(i);
                ins += g.in_degree(i);
                for &j in g.out_neighbors(i) {
                    prop_assert!(g.in_neighbors(j).contains(&i));
                    prop_assert!(model.contains(&(i.index(), j.index())));
                }
                for &k in g.in_neighbors(i) {
                    prop_assert!(g.out_neighbors(k).contains(&i));
                }
            }
            prop_assert_eq!(outs, model.len());
            prop_assert_eq!(ins, model.len());
            for u in 0..n {
                for v in 0..n {
                    prop_assert_eq!(
                        g.has_edge(NodeId::new(u), NodeId::new(v)),
                        model.contains(&(u, v))
                    );
                }
            }
        }
    }
}
