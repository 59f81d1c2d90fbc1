//! Batch sampling on a rayon pool.
//!
//! Forest `k` always uses RNG stream `k`, so the list is the same for every
//! thread count and chunking.

use forestq_core::sampler::sample_forest_range;
use forestq_core::{Digraph, ForestList, SeedStream};
use rayon::prelude::*;
use rayon::ThreadPool;

pub fn build_pool(threads: usize) -> anyhow::Result<ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?)
}

/// `l` independent uniform forests of `g`.
pub fn sample_list(g: &Digraph, l: u64, seeds: &SeedStream, pool: &ThreadPool) -> ForestList {
    assert!(l >= 1, "sample count must be positive");
    let chunks = (pool.current_num_threads() as u64 * 4).min(l);
    let step = l.div_ceil(chunks);
    let ranges: Vec<_> = (0..l)
        .step_by(step as usize)
        .map(|s| s..(s + step).min(l))
        .collect();
    let parts: Vec<_> = pool.install(|| {
        ranges
            .into_par_iter()
            .map(|r| sample_forest_range(g, r, seeds))
            .collect()
    });
    ForestList::from_forests(parts.into_iter().flatten().collect())
}
