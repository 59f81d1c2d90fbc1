mod common;

use common::*;
use forestq_core::estimators::{sfq_term, sfqplus_term};
use forestq_core::oracle::exact_forest_matrix;
use forestq_core::sampler::sample_forest_range;
use forestq_core::{
    required_samples, sfq_query, sfqplus_query, Digraph, EstimatorParams, ForestList, NodeId,
    SeedStream,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn closed_sfq_var(w: f64) -> f64 {
    w - w * w
}

fn closed_sfqplus_var(w: f64, dj: usize, diagonal: bool) -> f64 {
    let d = dj as f64;
    if diagonal {
        3.0 * w / (1.0 + d) - 2.0 / ((1.0 + d) * (1.0 + d)) - w * w
    } else {
        w / (2.0 + d) - w * w
    }
}

fn check_moments(g: &Digraph, samples: u64, seed: u64) {
    let n = g.node_count();
    let omega = exact_forest_matrix(g).unwrap();
    let forests = sample_forest_range(g, 0..samples, &SeedStream::new(seed));
    let sn = samples as f64;
    for i in 0..n {
        for j in 0..n {
            let (ni, nj) = (NodeId::new(i), NodeId::new(j));
            let w = omega.get(i, j);
            let dj = g.out_degree(nj);
            let cases = [
                ("SFQ", closed_sfq_var(w), 0usize),
                ("SFQPlus", closed_sfqplus_var(w, dj, i == j), 1),
            ];
            for (name, var, which) in cases {
                let (mut s1, mut s2) = (0.0, 0.0);
                for f in &forests {
                    let x = if which == 0 {
                        sfq_term(f, ni, nj)
                    } else {
                        sfqplus_term(g, f, ni, nj)
                    };
                    s1 += x;
                    s2 += x * x;
                }
                let mean = s1 / sn;
                let svar = (s2 / sn - mean * mean) * sn / (sn - 1.0);
                let var = var.max(0.0);
                if var < 1e-12 {
                    assert!(
                        (mean - w).abs() < 1e-12,
                        "{name} ({i},{j}) mean {mean} vs {w}"
                    );
                    assert!(svar < 1e-12, "{name} ({i},{j}) var {svar}");
                    continue;
                }
                let sd = (var / sn).sqrt();
                assert!(
                    (mean - w).abs() <= 4.0 * sd,
                    "{name} ({i},{j}): mean {mean} vs {w} (sd {sd})"
                );
                assert!(
                    (svar - var).abs() <= 0.05 * var,
                    "{name} ({i},{j}): var {svar} vs {var}"
                );
            }
        }
    }
}

#[test]
fn three_cycle_moments() {
    check_moments(&cycle3(), 1_000_000, 31);
}

#[test]
fn four_node_moments() {
    let g = Digraph::from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 1), (0, 3)]).unwrap();
    check_moments(&g, 1_000_000, 32);
}

#[test]
fn closed_form_variance_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let g = random_digraph(6, 0.35, &mut rng);
        let omega = exact_forest_matrix(&g).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let w = omega.get(i, j);
                let dj = g.out_degree(NodeId::new(j));
                let plus = closed_sfqplus_var(w, dj, i == j);
                assert!(plus <= closed_sfq_var(w) + 1e-12);
                assert!(plus >= -1e-12);
                if i != j {
                    assert!(w <= 1.0 / (2.0 + dj as f64) + 1e-12);
                }
            }
        }
    }
}

#[test]
fn estimates_stay_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = random_digraph(8, 0.3, &mut rng);
    let list = forestq_core::sample_forest_list(&g, 500, &SeedStream::new(1));
    for i in g.nodes() {
        for j in g.nodes() {
            let a = sfq_query(&list, i, j).unwrap().value;
            let b = sfqplus_query(&g, &list, i, j).unwrap().value;
            assert!((0.0..=1.0).contains(&a));
            assert!((0.0..=1.0).contains(&b));
            if i == j {
                assert!(b >= 1.0 / (1.0 + g.out_degree(j) as f64) - 1e-12);
            }
        }
    }
}

#[test]
fn empty_list_is_an_error() {
    let g = cycle3();
    let list = ForestList::new();
    let (a, b) = (NodeId::new(0), NodeId::new(1));
    assert!(sfq_query(&list, a, b).is_err());
    assert!(sfqplus_query(&g, &list, a, b).is_err());
}

#[test]
fn guarantee_holds_on_small_graph() {
    let g = cycle3();
    let omega = exact_forest_matrix(&g).unwrap();
    let p = EstimatorParams::new(0.1, 0.05).unwrap();
    let trials = 300u64;
    for (i, j) in [(0, 0), (0, 1), (2, 1)] {
        let (ni, nj) = (NodeId::new(i), NodeId::new(j));
        let l = required_samples(&p, g.out_degree(nj), i == j);
        let mut ok = 0;
        for t in 0..trials {
            let list = ForestList::from_forests(sample_forest_range(
                &g,
                t * l..(t + 1) * l,
                &SeedStream::new(90 + i as u64 * 3 + j as u64),
            ));
            let est = sfqplus_query(&g, &list, ni, nj).unwrap().value;
            let w = omega.get(i, j);
            let band = if i == j { 0.1 * w } else { 0.1 };
            if (est - w).abs() <= band {
                ok += 1;
            }
        }
        assert!(
            ok as f64 >= 0.95 * trials as f64,
            "({i},{j}): {ok}/{trials}"
        );
    }
}
