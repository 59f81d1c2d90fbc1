//! Spanning converging forests and multiset forest lists.
//!
//! A forest is a successor map: every node either has exactly one out-edge
//! (its successor) or is a root. Sampled forests own a flat successor array
//! and a root cache. Forests produced by dynamic updates share that array
//! with their parent through an `Arc` and record their edits in a small
//! sorted overlay, so spawning or editing a forest never copies `O(n)` data.
//! While an overlay is present the root cache is stale and roots are found
//! by walking successor chains.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{Digraph, NodeId};

pub(crate) const NO_SUCCESSOR: u32 = u32::MAX;

/// Violation of a forest invariant, reported by the checked constructors
/// and validators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForestDefect {
    /// The successor walk from `start` did not terminate within `n` steps.
    Cycle {
        start: NodeId,
    },
    /// `(from, to)` is a forest edge missing from the graph.
    MissingEdge {
        from: NodeId,
        to: NodeId,
    },
    /// A successor points outside `0..n`.
    OutOfRange {
        node: NodeId,
    },
    /// Forest length differs from the graph's node count.
    SizeMismatch {
        forest: usize,
        graph: usize,
    },
    ZeroMultiplicity,
    /// Stored total weight differs from the sum of multiplicities.
    WeightMismatch {
        stored: u64,
        actual: u64,
    },
    /// The root cache of a clean forest disagrees with the successor chain.
    StaleRoot {
        node: NodeId,
    },
}

impl fmt::Display for ForestDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForestDefect::Cycle { start } => write!(f, "cycle reachable from node {start}"),
            ForestDefect::MissingEdge { from, to } => {
                write!(f, "forest edge ({from}, {to}) not in graph")
            }
            ForestDefect::OutOfRange { node } => write!(f, "successor of {node} out of range"),
            ForestDefect::SizeMismatch { forest, graph } => {
                write!(f, "forest has {forest} nodes, graph has {graph}")
            }
            ForestDefect::ZeroMultiplicity => write!(f, "forest with multiplicity 0"),
            ForestDefect::WeightMismatch { stored, actual } => {
                write!(f, "total weight {stored} != sum of multiplicities {actual}")
            }
            ForestDefect::StaleRoot { node } => write!(f, "clean root cache wrong at {node}"),
        }
    }
}

#[derive(Debug)]
struct ForestBase {
    successor: Vec<u32>,
    root: Vec<u32>,
}

impl ForestBase {
    /// Root cache by memoised chain walks; `O(n)` total.
    fn from_successors(successor: Vec<u32>) -> Result<Self, ForestDefect> {
        let n = successor.len();
        let mut root = alloc::vec![NO_SUCCESSOR; n];
        let mut path = Vec::new();
        for start in 0..n {
            if root[start] != NO_SUCCESSOR {
                continue;
            }
            path.clear();
            let mut x = start;
            let terminal = loop {
                if root[x] != NO_SUCCESSOR {
                    break root[x];
                }
                let s = successor[x];
                if s == NO_SUCCESSOR {
                    break x as u32;
                }
                if s as usize >= n {
                    return Err(ForestDefect::OutOfRange {
                        node: NodeId::new(x),
                    });
                }
                path.push(x);
                if path.len() > n {
                    return Err(ForestDefect::Cycle {
                        start: NodeId::new(start),
                    });
                }
                x = s as usize;
            };
            root[x] = terminal;
            for &p in &path {
                root[p] = terminal;
            }
        }
        Ok(ForestBase { successor, root })
    }
}

/// One spanning converging forest with its multiplicity in a [`ForestList`].
#[derive(Clone, Debug)]
pub struct Forest {
    base: Arc<ForestBase>,
    /// Successor overrides sorted by node; a non-empty overlay marks the
    /// root cache dirty.
    overlay: Vec<(u32, u32)>,
    multiplicity: u64,
}

impl Forest {
    /// Forest with every node a root.
    pub fn empty(n: usize) -> Self {
        let successor = alloc::vec![NO_SUCCESSOR; n];
        let root = (0..n as u32).collect();
        Forest {
            base: Arc::new(ForestBase { successor, root }),
            overlay: Vec::new(),
            multiplicity: 1,
        }
    }

    /// Builds a forest from a successor map, rejecting cycles and
    /// out-of-range targets.
    pub fn from_successors(successors: &[Option<NodeId>]) -> Result<Self, ForestDefect> {
        let raw = successors
            .iter()
            .map(|s| s.map_or(NO_SUCCESSOR, NodeId::raw))
            .collect();
        Self::from_raw(raw)
    }

    pub(crate) fn from_raw(successor: Vec<u32>) -> Result<Self, ForestDefect> {
        Ok(Forest {
            base: Arc::new(ForestBase::from_successors(successor)?),
            overlay: Vec::new(),
            multiplicity: 1,
        })
    }

    /// Trusted constructor for the sampler, which computes roots itself.
    pub(crate) fn from_parts(successor: Vec<u32>, root: Vec<u32>) -> Self {
        debug_assert_eq!(successor.len(), root.len());
        Forest {
            base: Arc::new(ForestBase { successor, root }),
            overlay: Vec::new(),
            multiplicity: 1,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.base.successor.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    pub fn set_multiplicity(&mut self, m: u64) {
        assert!(m >= 1, "multiplicity must be positive");
        self.multiplicity = m;
    }

    /// True when the root cache may be stale.
    #[inline]
    pub fn is_dirty(&self) -> bool {
        !self.overlay.is_empty()
    }

    /// Number of pending successor overrides.
    #[inline]
    pub fn overlay_len(&self) -> usize {
        self.overlay.len()
    }

    #[inline]
    fn raw_successor(&self, x: u32) -> u32 {
        if !self.overlay.is_empty() {
            if let Ok(k) = self.overlay.binary_search_by_key(&x, |p| p.0) {
                return self.overlay[k].1;
            }
        }
        self.base.successor[x as usize]
    }

    #[inline]
    pub fn successor(&self, i: NodeId) -> Option<NodeId> {
        match self.raw_successor(i.raw()) {
            NO_SUCCESSOR => None,
            s => Some(NodeId(s)),
        }
    }

    #[inline]
    pub fn is_root(&self, i: NodeId) -> bool {
        self.raw_successor(i.raw()) == NO_SUCCESSOR
    }

    #[inline]
    pub fn contains_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.raw_successor(from.raw()) == to.raw()
    }

    /// `r_φ(i)`: the terminal of the successor chain from `i`.
    ///
    /// Clean forests answer from the root cache. Dirty forests walk the
    /// chain; the walk panics if it exceeds `n` steps, which can only happen
    /// on a corrupted forest.
    #[inline]
    pub fn resolve_root(&self, i: NodeId) -> NodeId {
        if self.overlay.is_empty() {
            return NodeId(self.base.root[i.index()]);
        }
        match self.walk(i.raw()) {
            Some(r) => NodeId(r),
            None => panic!("forest invariant violated: cycle reachable from node {i}"),
        }
    }

    fn walk(&self, start: u32) -> Option<u32> {
        let limit = self.len();
        let mut x = start;
        for _ in 0..=limit {
            let s = self.raw_successor(x);
            if s == NO_SUCCESSOR {
                return Some(x);
            }
            x = s;
        }
        None
    }

    /// Non-panicking root lookup used by validators.
    pub fn try_root(&self, i: NodeId) -> Result<NodeId, ForestDefect> {
        self.walk(i.raw())
            .map(NodeId)
            .ok_or(ForestDefect::Cycle { start: i })
    }

    fn set_successor(&mut self, node: u32, succ: u32) {
        match self.overlay.binary_search_by_key(&node, |p| p.0) {
            Ok(k) => self.overlay[k].1 = succ,
            Err(k) => self.overlay.insert(k, (node, succ)),
        }
    }

    /// Folds the overlay into owned storage once it outgrows
    /// `max(16, n / 32)` entries, keeping lookups cheap and the `O(n)` copy
    /// amortised over many edits.
    pub fn compact_if_large(&mut self) -> bool {
        if self.overlay.len() > core::cmp::max(16, self.len() / 32) {
            self.rebuild_roots();
            true
        } else {
            false
        }
    }

    /// A copy of this forest with the edge `(u, v)` added. `u` must be a
    /// root and `v` must not be rooted at `u`; the copy shares storage with
    /// `self` and carries the same multiplicity.
    pub fn with_edge(&self, u: NodeId, v: NodeId) -> Forest {
        debug_assert!(self.is_root(u));
        let mut f = self.clone();
        f.set_successor(u.raw(), v.raw());
        f
    }

    /// Removes `u`'s out-edge, making `u` a root.
    pub fn cut(&mut self, u: NodeId) {
        self.set_successor(u.raw(), NO_SUCCESSOR);
    }

    /// Recomputes the root cache in `O(n)`, folding the overlay into a fresh
    /// owned successor array. Idempotent on clean forests.
    pub fn rebuild_roots(&mut self) {
        if self.overlay.is_empty() {
            return;
        }
        let mut successor = self.base.successor.clone();
        for &(node, s) in &self.overlay {
            successor[node as usize] = s;
        }
        let base = ForestBase::from_successors(successor)
            .unwrap_or_else(|d| panic!("forest invariant violated: {d}"));
        self.base = Arc::new(base);
        self.overlay.clear();
    }

    /// Owned successor map.
    pub fn successors(&self) -> Vec<Option<NodeId>> {
        (0..self.len())
            .map(|i| self.successor(NodeId::new(i)))
            .collect()
    }

    /// Canonical encoding: successor per node, `u32::MAX` for roots.
    pub fn encoding(&self) -> Vec<u32> {
        (0..self.len() as u32)
            .map(|i| self.raw_successor(i))
            .collect()
    }

    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len())
            .map(NodeId::new)
            .filter(move |&i| self.is_root(i))
    }

    /// Checks successor range, acyclicity, cache coherence and edge validity
    /// against `g`, reporting the first defect in that order.
    pub fn validate(&self, g: &Digraph) -> Result<(), ForestDefect> {
        let n = self.len();
        if n != g.node_count() {
            return Err(ForestDefect::SizeMismatch {
                forest: n,
                graph: g.node_count(),
            });
        }
        if self.multiplicity == 0 {
            return Err(ForestDefect::ZeroMultiplicity);
        }
        for i in 0..n {
            if self.raw_successor(i as u32) != NO_SUCCESSOR
                && self.raw_successor(i as u32) as usize >= n
            {
                return Err(ForestDefect::OutOfRange {
                    node: NodeId::new(i),
                });
            }
        }
        for i in 0..n {
            let node = NodeId::new(i);
            let r = self.try_root(node)?;
            if !self.is_dirty() && self.base.root[i] != r.raw() {
                return Err(ForestDefect::StaleRoot { node });
            }
        }
        for i in 0..n {
            let node = NodeId::new(i);
            let s = self.raw_successor(i as u32);
            if s != NO_SUCCESSOR && !g.has_edge(node, NodeId(s)) {
                return Err(ForestDefect::MissingEdge {
                    from: node,
                    to: NodeId(s),
                });
            }
        }
        Ok(())
    }

    /// Overwrites a successor without any checks. Exists so validators can
    /// be exercised against corrupted forests.
    #[doc(hidden)]
    pub fn inject_successor(&mut self, node: NodeId, succ: Option<NodeId>) {
        self.set_successor(node.raw(), succ.map_or(NO_SUCCESSOR, NodeId::raw));
    }
}

impl PartialEq for Forest {
    /// Structural equality of the successor maps; multiplicity is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (0..self.len() as u32).all(|i| self.raw_successor(i) == other.raw_successor(i))
    }
}

impl Eq for Forest {}

/// Debug listing, one `i -> successor` line per node (`-` for roots).
impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            match self.successor(NodeId::new(i)) {
                Some(s) => writeln!(f, "{i} -> {s}")?,
                None => writeln!(f, "{i} -> -")?,
            }
        }
        Ok(())
    }
}

/// Multiset of forests; `total_weight` is the effective sample count.
#[derive(Clone, Debug, Default)]
pub struct ForestList {
    forests: Vec<Forest>,
    total_weight: u64,
    epoch: u64,
}

impl ForestList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_forests(forests: Vec<Forest>) -> Self {
        let total_weight = forests.iter().map(Forest::multiplicity).sum();
        ForestList {
            forests,
            total_weight,
            epoch: 0,
        }
    }

    pub fn push(&mut self, f: Forest) {
        self.total_weight += f.multiplicity();
        self.forests.push(f);
    }

    #[inline]
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    /// Number of distinct entries (not the total weight).
    #[inline]
    pub fn len(&self) -> usize {
        self.forests.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.forests.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Forest> {
        self.forests.iter()
    }

    pub fn forests(&self) -> &[Forest] {
        &self.forests
    }

    /// Mutable access for in-place edits. Callers that change
    /// multiplicities must call [`ForestList::recompute_weight`].
    pub fn forests_mut(&mut self) -> &mut Vec<Forest> {
        &mut self.forests
    }

    pub fn recompute_weight(&mut self) -> u64 {
        self.total_weight = self.forests.iter().map(Forest::multiplicity).sum();
        self.total_weight
    }

    /// Update counter, bumped once per mutation by the dynamic module.
    /// Readers can compare epochs to detect an overlapping update.
    #[inline]
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub(crate) fn bump_epoch(&mut self) {
        self.epoch += 1;
    }

    pub fn validate(&self, g: &Digraph) -> Result<(), ForestDefect> {
        let actual: u64 = self.forests.iter().map(Forest::multiplicity).sum();
        if actual != self.total_weight {
            return Err(ForestDefect::WeightMismatch {
                stored: self.total_weight,
                actual,
            });
        }
        self.forests.iter().try_for_each(|f| f.validate(g))
    }
}

impl<'a> IntoIterator for &'a ForestList {
    type Item = &'a Forest;
    type IntoIter = core::slice::Iter<'a, Forest>;

    fn into_iter(self) -> Self::IntoIter {
        self.forests.iter()
    }
}
