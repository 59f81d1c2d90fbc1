//! Random graphs and update streams for tests and benchmarks.

use forestq_core::{Digraph, Edge, NodeId, UpdateEvent};
use rand::seq::index::sample;
use rand::Rng;

/// Each ordered pair `(u, v)`, `u ≠ v`, present independently with
/// probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Digraph {
    let mut g = Digraph::new(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                g.insert_edge(Edge::new(u, v)).unwrap();
            }
        }
    }
    g
}

/// Sparse digraph where node `u` has out-degree drawn uniformly from
/// `min_out..=max_out` with distinct uniform targets. With `min_out ≥ 1`
/// there are no sinks.
pub fn sparse_random<R: Rng + ?Sized>(
    n: usize,
    min_out: usize,
    max_out: usize,
    rng: &mut R,
) -> Digraph {
    assert!(min_out <= max_out && max_out < n.max(1));
    let mut g = Digraph::new(n);
    for u in 0..n {
        let d = rng.gen_range(min_out..=max_out);
        // Targets drawn from 0..n-1 and shifted past u, which excludes u.
        for t in sample(rng, n - 1, d) {
            let v = if t >= u { t + 1 } else { t };
            g.insert_edge(Edge::new(u, v)).unwrap();
        }
    }
    g
}

/// Alternating insertions and deletions valid against `g` when applied in
/// order. Deletions only remove edges whose source keeps out-degree at
/// least `keep_out`. `g` itself is not modified.
pub fn random_update_stream<R: Rng + ?Sized>(
    g: &Digraph,
    inserts: usize,
    deletes: usize,
    keep_out: usize,
    rng: &mut R,
) -> Vec<UpdateEvent> {
    let n = g.node_count();
    assert!(n >= 2, "need at least two nodes");
    let mut model = g.clone();
    let mut events = Vec::with_capacity(inserts + deletes);
    let (mut ins, mut del) = (0, 0);
    let mut attempts = 0u64;
    while ins < inserts || del < deletes {
        attempts += 1;
        assert!(
            attempts < 1_000_000 + 1000 * (inserts + deletes) as u64,
            "cannot find valid updates"
        );
        let want_insert = del >= deletes || (ins < inserts && (ins + del) % 2 == 0);
        let u = NodeId::new(rng.gen_range(0..n));
        if want_insert {
            let v = NodeId::new(rng.gen_range(0..n));
            if u == v || model.has_edge(u, v) {
                continue;
            }
            let e = Edge::new(u, v);
            model.insert_edge(e).unwrap();
            events.push(UpdateEvent::insert(e, events.len() as u64));
            ins += 1;
        } else {
            let d = model.out_degree(u);
            if d == 0 || d <= keep_out {
                continue;
            }
            let v = model.out_neighbors(u)[rng.gen_range(0..d)];
            let e = Edge::new(u, v);
            model.delete_edge(e).unwrap();
            events.push(UpdateEvent::delete(e, events.len() as u64));
            del += 1;
        }
    }
    events
}
