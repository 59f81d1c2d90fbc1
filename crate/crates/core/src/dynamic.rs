//! Keeping a uniform forest list uniform under edge updates.
//!
//! Inserting `(u, v)`: every forest where `u` is a root and `v` is not
//! rooted at `u` gains a sibling with the edge `(u, v)` added. Those siblings
//! are exactly the new forests, one per old forest in bijection.
//!
//! Deleting `(u, v)`: forests containing the edge lose it and are kept;
//! forests where `u` is a root and `v` is not rooted at `u` (the images of
//! the cut forests) are kept once; every other forest has its weight doubled.
//! Each forest of the new graph therefore receives twice the weight it had
//! per sample before, and the total weight never decreases.
//!
//! Both updates cost one or two root lookups per list entry. Pruning caps
//! the list at a fixed total weight by uniform subsampling.

use alloc::boxed::Box;
use alloc::vec::Vec;

use hashbrown::HashSet;
use rand::Rng;

use crate::error::{Error, Result};
use crate::forest::{Forest, ForestList};
use crate::graph::{Digraph, Edge};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UpdateKind {
    Insert,
    Delete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateEvent {
    pub kind: UpdateKind,
    pub edge: Edge,
    /// Position in the stream; strictly increasing.
    pub sequence: u64,
}

impl UpdateEvent {
    pub fn insert(edge: Edge, sequence: u64) -> Self {
        UpdateEvent {
            kind: UpdateKind::Insert,
            edge,
            sequence,
        }
    }

    pub fn delete(edge: Edge, sequence: u64) -> Self {
        UpdateEvent {
            kind: UpdateKind::Delete,
            edge,
            sequence,
        }
    }
}

/// Prune threshold `l' = factor · base_count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PruneConfig {
    base_count: u64,
    factor: f64,
}

impl PruneConfig {
    pub const DEFAULT_FACTOR: f64 = 5.0;

    pub fn new(base_count: u64, factor: f64) -> Result<Self> {
        if base_count == 0 {
            return Err(Error::InvalidParameter("prune base count must be positive"));
        }
        if !factor.is_finite() || factor < 1.0 {
            return Err(Error::InvalidParameter("prune factor must be >= 1"));
        }
        Ok(PruneConfig { base_count, factor })
    }

    pub fn with_default_factor(base_count: u64) -> Result<Self> {
        Self::new(base_count, Self::DEFAULT_FACTOR)
    }

    pub fn base_count(&self) -> u64 {
        self.base_count
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn threshold(&self) -> u64 {
        let t = libm::floor(self.factor * self.base_count as f64) as u64;
        t.max(self.base_count)
    }
}

/// What an update did to the list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UpdateStats {
    /// Entries appended by an insertion.
    pub spawned: usize,
    /// Entries that lost the deleted edge.
    pub cut: usize,
    /// Entries whose multiplicity doubled on a deletion.
    pub doubled: usize,
    /// Entries whose overlay was folded into owned storage.
    pub compacted: usize,
    pub weight_before: u64,
    pub weight_after: u64,
}

/// `r_φ(u) = u ∧ r_φ(v) ≠ u`: adding `(u, v)` to `φ` yields a valid forest.
#[inline]
fn accepts_edge(f: &Forest, e: Edge) -> bool {
    f.is_root(e.from) && f.resolve_root(e.to) != e.from
}

/// List half of an insertion: appends `φ ∪ {e}` for every accepting `φ`.
/// The graph is not touched.
pub fn spawn_for_insert(list: &mut ForestList, e: Edge) -> UpdateStats {
    let mut stats = UpdateStats {
        weight_before: list.total_weight(),
        ..UpdateStats::default()
    };
    let existing = list.len();
    for k in 0..existing {
        let f = &list.forests()[k];
        if accepts_edge(f, e) {
            let mut child = f.with_edge(e.from, e.to);
            if child.compact_if_large() {
                stats.compacted += 1;
            }
            list.push(child);
            stats.spawned += 1;
        }
    }
    stats.weight_after = list.total_weight();
    stats
}

/// List half of a deletion. Must run while `e` is still in the graph's
/// forest set, i.e. before the graph mutation.
pub fn reweight_for_delete(list: &mut ForestList, e: Edge) -> UpdateStats {
    let mut stats = UpdateStats {
        weight_before: list.total_weight(),
        ..UpdateStats::default()
    };
    for f in list.forests_mut().iter_mut() {
        if f.contains_edge(e.from, e.to) {
            f.cut(e.from);
            if f.compact_if_large() {
                stats.compacted += 1;
            }
            stats.cut += 1;
        } else if !accepts_edge(f, e) {
            let m = f.multiplicity();
            f.set_multiplicity(m.checked_mul(2).expect("multiplicity overflow"));
            stats.doubled += 1;
        }
    }
    stats.weight_after = list.recompute_weight();
    stats
}

/// Inserts `e` into `g` and extends `list` so it stays uniform over `F(g)`.
/// On error neither `g` nor `list` changes.
pub fn insert_update(g: &mut Digraph, list: &mut ForestList, e: Edge) -> Result<UpdateStats> {
    g.insert_edge(e)?;
    let stats = spawn_for_insert(list, e);
    list.bump_epoch();
    assert!(stats.weight_after >= stats.weight_before);
    Ok(stats)
}

/// Deletes `e` from `g` and reweights `list` so it stays uniform over `F(g)`.
/// On error neither `g` nor `list` changes.
pub fn delete_update(g: &mut Digraph, list: &mut ForestList, e: Edge) -> Result<UpdateStats> {
    g.check_node(e.from)?;
    g.check_node(e.to)?;
    if !g.has_edge(e.from, e.to) {
        return Err(Error::EdgeNotFound(e));
    }
    let stats = reweight_for_delete(list, e);
    g.delete_edge(e)?;
    list.bump_epoch();
    assert!(stats.weight_after >= stats.weight_before);
    Ok(stats)
}

/// If the total weight exceeds `l'`, keeps `l'` slots drawn uniformly without
/// replacement from the multiplicity-expanded list (a forest of
/// multiplicity `m` is `m` slots). Returns whether anything was dropped.
pub fn prune<R: Rng + ?Sized>(list: &mut ForestList, cfg: &PruneConfig, rng: &mut R) -> bool {
    let target = cfg.threshold();
    let total = list.total_weight();
    if total <= target {
        return false;
    }

    // Floyd's subset sampling: `target` distinct slots out of `total`.
    let mut chosen: HashSet<u64> = HashSet::with_capacity(target as usize);
    for j in (total - target)..total {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut slots: Vec<u64> = chosen.into_iter().collect();
    slots.sort_unstable();

    let old = core::mem::take(list.forests_mut());
    let mut kept = Vec::new();
    let mut cursor = 0usize;
    let mut start = 0u64;
    for mut f in old {
        let end = start + f.multiplicity();
        let mut hits = 0u64;
        while cursor < slots.len() && slots[cursor] < end {
            hits += 1;
            cursor += 1;
        }
        if hits > 0 {
            f.set_multiplicity(hits);
            kept.push(f);
        }
        start = end;
    }
    *list.forests_mut() = kept;
    let w = list.recompute_weight();
    debug_assert_eq!(w, target);
    assert!(
        w >= cfg.base_count(),
        "pruned list fell below the base count"
    );
    list.bump_epoch();
    true
}

/// Result of one event of a stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventOutcome {
    pub stats: UpdateStats,
    pub pruned: bool,
}

/// Applies one event, then prunes if the list grew past the threshold.
pub fn apply_event<R: Rng + ?Sized>(
    g: &mut Digraph,
    list: &mut ForestList,
    event: &UpdateEvent,
    cfg: &PruneConfig,
    rng: &mut R,
) -> Result<EventOutcome> {
    let stats = match event.kind {
        UpdateKind::Insert => insert_update(g, list, event.edge)?,
        UpdateKind::Delete => delete_update(g, list, event.edge)?,
    };
    let pruned = prune(list, cfg, rng);
    Ok(EventOutcome { stats, pruned })
}

/// Applies `events` in order. The first invalid event aborts the stream with
/// its index; earlier events stay applied.
pub fn apply_stream<R: Rng + ?Sized>(
    g: &mut Digraph,
    list: &mut ForestList,
    events: &[UpdateEvent],
    cfg: &PruneConfig,
    rng: &mut R,
) -> Result<Vec<EventOutcome>> {
    let mut out = Vec::with_capacity(events.len());
    let mut last_seq: Option<u64> = None;
    for (index, ev) in events.iter().enumerate() {
        let wrap = |source| Error::InvalidEvent {
            index,
            source: Box::new(source),
        };
        if last_seq.is_some_and(|s| ev.sequence <= s) {
            return Err(wrap(Error::InvalidParameter(
                "event sequence numbers must increase",
            )));
        }
        last_seq = Some(ev.sequence);
        out.push(apply_event(g, list, ev, cfg, rng).map_err(wrap)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;
    use crate::sampler::SeedStream;
    use alloc::vec;

    fn nid(i: usize) -> NodeId {
        NodeId::new(i)
    }

    fn cycle3() -> Digraph {
        Digraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn insert_into_all_roots_forest() {
        let mut g = Digraph::new(3);
        let mut list = ForestList::from_forests(vec![Forest::empty(3)]);
        let s = insert_update(&mut g, &mut list, Edge::new(1, 2)).unwrap();
        assert_eq!(s.spawned, 1);
        assert_eq!(list.total_weight(), 2);
        assert_eq!(list.forests()[1].successor(nid(1)), Some(nid(2)));
        assert_eq!(list.forests()[1].resolve_root(nid(1)), nid(2));
        list.validate(&g).unwrap();
        assert_eq!(list.epoch(), 1);
    }

    #[test]
    fn duplicate_insert_leaves_list_untouched() {
        let mut g = cycle3();
        let mut list = ForestList::from_forests(vec![Forest::empty(3)]);
        let err = insert_update(&mut g, &mut list, Edge::new(0, 1)).unwrap_err();
        assert_eq!(err, Error::EdgeExists(Edge::new(0, 1)));
        assert_eq!(list.len(), 1);
        assert_eq!(list.epoch(), 0);
    }

    #[test]
    fn delete_sole_edge_forest() {
        let mut g = Digraph::from_edges(2, [(0, 1)]).unwrap();
        let f = Forest::from_successors(&[Some(nid(1)), None]).unwrap();
        let mut list = ForestList::from_forests(vec![f]);
        let s = delete_update(&mut g, &mut list, Edge::new(0, 1)).unwrap();
        assert_eq!(s.cut, 1);
        assert_eq!(list.total_weight(), 1);
        let f = &list.forests()[0];
        assert!(f.is_root(nid(0)) && f.is_root(nid(1)));
        assert_eq!(f.multiplicity(), 1);
        list.validate(&g).unwrap();
    }

    #[test]
    fn delete_absent_edge_rejected() {
        let mut g = cycle3();
        let mut list = ForestList::from_forests(vec![Forest::empty(3)]);
        assert_eq!(
            delete_update(&mut g, &mut list, Edge::new(0, 2)),
            Err(Error::EdgeNotFound(Edge::new(0, 2)))
        );
        assert_eq!(list.total_weight(), 1);
    }

    #[test]
    fn prune_to_threshold() {
        let cfg = PruneConfig::new(10, 1.0).unwrap();
        let g = cycle3();
        let mut list = crate::sampler::sample_forest_list(&g, 40, &SeedStream::new(1));
        let mut rng = SeedStream::new(2).rng(0);
        assert!(prune(&mut list, &cfg, &mut rng));
        assert_eq!(list.total_weight(), 10);
        assert!(!prune(&mut list, &cfg, &mut rng));
        list.validate(&g).unwrap();
    }

    #[test]
    fn prune_single_heavy_forest() {
        let cfg = PruneConfig::new(7, 1.0).unwrap();
        let mut f = Forest::empty(2);
        f.set_multiplicity(14);
        let mut list = ForestList::from_forests(vec![f]);
        prune(&mut list, &cfg, &mut SeedStream::new(0).rng(0));
        assert_eq!(list.len(), 1);
        assert_eq!(list.forests()[0].multiplicity(), 7);
    }

    #[test]
    fn prune_config_validation() {
        assert!(PruneConfig::new(0, 5.0).is_err());
        assert!(PruneConfig::new(10, 0.5).is_err());
        assert!(PruneConfig::new(10, f64::NAN).is_err());
        assert_eq!(PruneConfig::new(10, 5.0).unwrap().threshold(), 50);
        assert_eq!(PruneConfig::new(3, 1.5).unwrap().threshold(), 4);
    }

    #[test]
    fn stream_reports_failing_index() {
        let mut g = cycle3();
        let mut list = ForestList::from_forests(vec![Forest::empty(3)]);
        let cfg = PruneConfig::new(1, 100.0).unwrap();
        let events = [
            UpdateEvent::insert(Edge::new(0, 2), 0),
            UpdateEvent::delete(Edge::new(1, 0), 1),
        ];
        let err = apply_stream(
            &mut g,
            &mut list,
            &events,
            &cfg,
            &mut SeedStream::new(0).rng(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidEvent { index: 1, .. }));
        assert!(g.has_edge(nid(0), nid(2)));
    }

    #[test]
    fn stream_rejects_non_increasing_sequence() {
        let mut g = cycle3();
        let mut list = ForestList::from_forests(vec![Forest::empty(3)]);
        let cfg = PruneConfig::new(1, 100.0).unwrap();
        let events = [
            UpdateEvent::insert(Edge::new(0, 2), 5),
            UpdateEvent::delete(Edge::new(0, 2), 5),
        ];
        let err = apply_stream(
            &mut g,
            &mut list,
            &events,
            &cfg,
            &mut SeedStream::new(0).rng(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidEvent { index: 1, .. }));
    }

    #[test]
    fn empty_stream_is_noop() {
        let mut g = cycle3();
        let mut list = ForestList::from_forests(vec![Forest::empty(3)]);
        let cfg = PruneConfig::new(1, 5.0).unwrap();
        let out =
            apply_stream(&mut g, &mut list, &[], &cfg, &mut SeedStream::new(0).rng(0)).unwrap();
        assert!(out.is_empty());
        assert_eq!(list.epoch(), 0);
        assert_eq!(g.edge_count(), 3);
    }
}
