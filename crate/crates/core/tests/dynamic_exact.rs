mod common;

use common::*;
use forestq_core::oracle::enumerate_forests;
use forestq_core::{delete_update, insert_update, Digraph, Edge, NodeId};
use std::collections::HashSet;

/// Starting from the exact uniform list over `F(g)`, applies one update and
/// returns the per-forest weights over `F(g')`.
fn weights_after(g: &Digraph, e: Edge, insert: bool) -> (Vec<u64>, Digraph) {
    let set = enumerate_forests(g).unwrap();
    let mut list = uniform_list(&set);
    let mut g2 = g.clone();
    if insert {
        insert_update(&mut g2, &mut list, e).unwrap();
    } else {
        delete_update(&mut g2, &mut list, e).unwrap();
    }
    list.validate(&g2).unwrap();
    let set2 = enumerate_forests(&g2).unwrap();
    (class_weights(&list, &set2), g2)
}

fn check_all_updates(g: &Digraph) {
    let n = g.node_count();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let e = Edge::new(u, v);
            let insert = !g.has_edge(NodeId::new(u), NodeId::new(v));
            let (w, _) = weights_after(g, e, insert);
            let want = if insert { 1 } else { 2 };
            assert!(
                w.iter().all(|&x| x == want),
                "graph {:?}, {} {e}: weights {w:?}",
                g.edges().collect::<Vec<_>>(),
                if insert { "insert" } else { "delete" }
            );
        }
    }
}

#[test]
fn every_update_on_graphs_up_to_three_nodes() {
    for n in 1..=3 {
        for g in all_digraphs(n) {
            check_all_updates(&g);
        }
    }
}

#[test]
fn every_update_on_four_node_graphs() {
    for g in all_digraphs(4) {
        check_all_updates(&g);
    }
}

#[test]
fn insertion_bijection_onto_new_forests() {
    // Forests gained by inserting e are exactly φ ∪ {e} for the accepting φ.
    for g in all_digraphs(3) {
        for (u, v) in [(0usize, 1usize), (1, 2), (2, 0), (0, 2)] {
            let (nu, nv) = (NodeId::new(u), NodeId::new(v));
            if g.has_edge(nu, nv) {
                continue;
            }
            let before = enumerate_forests(&g).unwrap();
            let mut g2 = g.clone();
            g2.insert_edge(Edge::new(u, v)).unwrap();
            let after = enumerate_forests(&g2).unwrap();
            let old: HashSet<Vec<u32>> = before.encodings().iter().cloned().collect();
            let gained: HashSet<Vec<u32>> = after
                .encodings()
                .iter()
                .filter(|e| !old.contains(*e))
                .cloned()
                .collect();
            let mut images = HashSet::new();
            for k in 0..before.len() {
                let f = before.forest(k);
                if f.is_root(nu) && f.resolve_root(nv) != nu {
                    assert!(images.insert(f.with_edge(nu, nv).encoding()));
                }
            }
            assert_eq!(images, gained);
            assert_eq!(after.len(), before.len() + gained.len());
        }
    }
}

#[test]
fn three_cycle_insert_and_delete_counts() {
    let g = cycle3();
    let (w, g2) = weights_after(&g, Edge::new(0, 2), true);
    assert_eq!(w.len(), 9);
    assert_eq!(enumerate_forests(&g2).unwrap().len(), 9);
    let (w, _) = weights_after(&g, Edge::new(2, 0), false);
    assert_eq!(w.len(), 4);
    assert!(w.iter().all(|&x| x == 2));
}
