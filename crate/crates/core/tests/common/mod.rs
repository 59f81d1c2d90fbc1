#![allow(dead_code)]

use forestq_core::oracle::ForestSet;
use forestq_core::{Digraph, Edge, Forest, ForestList};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const SIGNIFICANCE: f64 = 0.001;

pub fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

/// Pearson goodness-of-fit p-value of `counts` against the uniform law.
pub fn uniform_chi_square_p(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    let expected = total / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c - expected) * (c - expected) / expected)
        .sum();
    chi_square_sf(stat, counts.len() - 1)
}

/// Wald test that the mean of i.i.d. contribution vectors has equal
/// components. Each sample contributes sparse `(class, weight)` pairs; the
/// covariance is estimated from the samples, so weighted or duplicated
/// contributions are handled correctly.
pub fn wald_uniform_p(samples: &[Vec<(usize, f64)>], k: usize) -> f64 {
    if k < 2 {
        return 1.0;
    }
    let n = samples.len() as f64;
    let mut mean = vec![0.0; k];
    let mut second = vec![0.0; k * k];
    for s in samples {
        let mut dense = vec![0.0; k];
        for &(c, w) in s {
            dense[c] += w;
        }
        for a in 0..k {
            if dense[a] == 0.0 {
                continue;
            }
            mean[a] += dense[a];
            for b in 0..k {
                second[a * k + b] += dense[a] * dense[b];
            }
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let cov: Vec<f64> = (0..k * k)
        .map(|ab| {
            let (a, b) = (ab / k, ab % k);
            (second[ab] / n - mean[a] * mean[b]) * n / (n - 1.0)
        })
        .collect();
    // Contrasts c_a = mean_a - mean_{k-1}.
    let d = k - 1;
    let c: Vec<f64> = (0..d).map(|a| mean[a] - mean[d]).collect();
    let mut m = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            m[a * d + b] = cov[a * k + b] - cov[a * k + d] - cov[d * k + b] + cov[d * k + d];
        }
    }
    let (stat, rank) = pivoted_quadratic_form(&mut m, c, d);
    chi_square_sf(n * stat, rank)
}

/// `cᵀ M⁺ c` for a positive semi-definite `m` by symmetric pivoted
/// elimination, and the numerical rank of `m`. Directions with no variance
/// must carry no signal.
fn pivoted_quadratic_form(m: &mut [f64], mut c: Vec<f64>, d: usize) -> (f64, usize) {
    let scale = (0..d).map(|k| m[k * d + k]).fold(0.0, f64::max);
    let mut live: Vec<usize> = (0..d).collect();
    let mut stat = 0.0;
    let mut rank = 0;
    while let Some((pos, &k)) = live
        .iter()
        .enumerate()
        .max_by(|a, b| m[a.1 * d + a.1].total_cmp(&m[b.1 * d + b.1]))
    {
        let piv = m[k * d + k];
        if piv <= 1e-10 * scale {
            break;
        }
        live.swap_remove(pos);
        stat += c[k] * c[k] / piv;
        rank += 1;
        for &r in &live {
            let f = m[r * d + k] / piv;
            c[r] -= f * c[k];
            for &s in &live {
                m[r * d + s] -= f * m[k * d + s];
            }
        }
    }
    for &r in &live {
        assert!(c[r].abs() < 1e-9, "deterministic contrast {r} is {}", c[r]);
    }
    (stat, rank)
}

/// Per-class total weight of a list, indexed by position in `set`.
/// Panics if the list contains a forest outside the set.
pub fn class_weights(list: &ForestList, set: &ForestSet) -> Vec<u64> {
    let mut w = vec![0u64; set.len()];
    for f in list {
        let k = set
            .position(f)
            .unwrap_or_else(|| panic!("forest outside F(G):\n{f}"));
        w[k] += f.multiplicity();
    }
    w
}

pub fn uniform_list(set: &ForestSet) -> ForestList {
    ForestList::from_forests((0..set.len()).map(|k| set.forest(k)).collect())
}

pub fn cycle3() -> Digraph {
    Digraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
}

pub fn two_node() -> Digraph {
    Digraph::from_edges(2, [(0, 1)]).unwrap()
}

/// Erdős–Rényi digraph: each ordered pair independently with probability `p`.
pub fn random_digraph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Digraph {
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

/// Every labelled simple digraph on `n` nodes.
pub fn all_digraphs(n: usize) -> impl Iterator<Item = Digraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &e)| e);
        Digraph::from_edges(n, edges).unwrap()
    })
}

pub fn forest_of(succ: &[Option<usize>]) -> Forest {
    let s: Vec<_> = succ
        .iter()
        .map(|x| x.map(forestq_core::NodeId::new))
        .collect();
    Forest::from_successors(&s).unwrap()
}
