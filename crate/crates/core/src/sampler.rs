//! Uniform spanning converging forests by Wilson's algorithm on the graph
//! augmented with an absorbing node.
//!
//! The absorbing node is implicit: at node `i` the walk draws uniformly from
//! `0..=d_i`, where `d_i` means "step to the absorbing node" and makes `i` a
//! root. Loop erasure is Wilson's last-exit overwrite of `next`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forest::{Forest, ForestList, NO_SUCCESSOR};
use crate::graph::Digraph;

/// Master seed from which independent ChaCha streams are derived.
///
/// Forest `k` of a batch always comes from stream `k`, so a batch is
/// reproducible regardless of how it is split across workers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub const fn new(seed: u64) -> Self {
        SeedStream { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// A child seed for an unrelated purpose (pruning, query workloads).
    /// SplitMix64 finaliser over `seed ^ tag`.
    pub fn derive(&self, tag: u64) -> SeedStream {
        let mut z = self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeedStream::new(z ^ (z >> 31))
    }
}

/// Per-sample working memory, sized `n` and reset at the start of each sample.
#[derive(Clone, Debug, Default)]
pub struct SamplerScratch {
    in_tree: Vec<bool>,
    next: Vec<u32>,
}

impl SamplerScratch {
    pub fn new(n: usize) -> Self {
        SamplerScratch {
            in_tree: vec![false; n],
            next: vec![NO_SUCCESSOR; n],
        }
    }

    fn reset(&mut self, n: usize) {
        self.in_tree.clear();
        self.in_tree.resize(n, false);
        self.next.clear();
        self.next.resize(n, NO_SUCCESSOR);
    }
}

/// Draws one forest uniformly from `F(g)`. Expected `O(n)` time on graphs
/// where the walk is absorbed quickly.
pub fn sample_forest<R: Rng + ?Sized>(
    g: &Digraph,
    rng: &mut R,
    scratch: &mut SamplerScratch,
) -> Forest {
    let n = g.node_count();
    scratch.reset(n);
    let in_tree = &mut scratch.in_tree;
    let next = &mut scratch.next;
    let mut root = vec![NO_SUCCESSOR; n];

    let step_cap = (n as u64).saturating_mul(1 << 32).max(1 << 32);
    let mut steps = 0u64;

    for start in 0..n {
        if in_tree[start] {
            continue;
        }
        let mut u = start;
        while !in_tree[u] {
            steps += 1;
            assert!(steps <= step_cap, "forest sampler exceeded its step cap");
            let nbrs = g.out_neighbors(crate::graph::NodeId::new(u));
            let d = nbrs.len() as u32;
            let pick = rng.gen_range(0..=d);
            if pick == d {
                next[u] = NO_SUCCESSOR;
                break;
            }
            let v = nbrs[pick as usize].index();
            next[u] = v as u32;
            u = v;
        }
        // `u` is either absorbed (a new root) or already in the tree.
        let terminal = if in_tree[u] { root[u] } else { u as u32 };
        let mut x = start;
        loop {
            if in_tree[x] {
                break;
            }
            in_tree[x] = true;
            root[x] = terminal;
            match next[x] {
                NO_SUCCESSOR => break,
                s => x = s as usize,
            }
        }
    }
    Forest::from_parts(core::mem::take(next), root)
}

/// Forests `range` of the batch defined by `seeds`, one stream per forest.
pub fn sample_forest_range(g: &Digraph, range: Range<u64>, seeds: &SeedStream) -> Vec<Forest> {
    let mut scratch = SamplerScratch::new(g.node_count());
    range
        .map(|k| sample_forest(g, &mut seeds.rng(k), &mut scratch))
        .collect()
}

/// `l` independent uniform forests, each with multiplicity 1.
pub fn sample_forest_list(g: &Digraph, l: u64, seeds: &SeedStream) -> ForestList {
    assert!(l >= 1, "sample count must be positive");
    ForestList::from_forests(sample_forest_range(g, 0..l, seeds))
}
