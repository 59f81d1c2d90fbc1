//! Entry estimators over a forest list.
//!
//! * SFQ averages the indicator `1{r_φ(i) = j}`.
//! * SFQPlus also credits forests where `i` is rooted at an in-neighbour of
//!   `j`: off the diagonal every hit on `j` or on `k ∈ N⁻_j` is worth
//!   `1/(2 + d_j)`; on the diagonal the estimate is
//!   `(1 + #{r_φ(i) ∈ N⁻_i}) / (1 + d_i)`.
//!
//! Hits are counted in integers (weighted by multiplicity) and divided once
//! at the end, so there is no floating-point accumulation error however
//! large the list grows.

use crate::error::{Error, Result};
use crate::forest::{Forest, ForestList};
use crate::graph::{Digraph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Sfq,
    SfqPlus,
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Method::Sfq => "SFQ",
            Method::SfqPlus => "SFQPlus",
        })
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sfq" => Ok(Method::Sfq),
            "sfqplus" | "sfq+" | "sfq-plus" => Ok(Method::SfqPlus),
            _ => Err(Error::InvalidParameter("method must be sfq or sfqplus")),
        }
    }
}

/// Accuracy `ε` and failure probability `δ`, both strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorParams {
    epsilon: f64,
    delta: f64,
}

impl EstimatorParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter("epsilon must lie in (0, 1)"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0, 1)"));
        }
        Ok(EstimatorParams { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for EstimatorParams {
    /// `ε = 0.03`, `δ = 0.01`.
    fn default() -> Self {
        EstimatorParams {
            epsilon: 0.03,
            delta: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntryEstimate {
    pub value: f64,
    pub sample_weight: u64,
    pub method: Method,
}

/// Sample count guaranteeing `|ω̄_ij − ω_ij| ≤ ε` (off-diagonal) or
/// `|ω̄_ii − ω_ii| ≤ ε ω_ii` (diagonal) with probability `1 − δ`.
/// `dj` is the current out-degree of the queried column. Never below 1.
pub fn required_samples(p: &EstimatorParams, dj: usize, diagonal: bool) -> u64 {
    let eps = p.epsilon;
    let log_term = libm::log(2.0 / p.delta);
    let raw = if diagonal {
        (2.0 / (3.0 * eps) + 1.0 / (4.0 * eps * eps)) * log_term
    } else {
        let s = 2.0 + dj as f64;
        (1.0 / (s * s)) * (1.0 / (2.0 * eps * eps) + 2.0 / (3.0 * eps)) * log_term
    };
    (libm::ceil(raw) as u64).max(1)
}

fn check_query(list: &ForestList, g_nodes: Option<usize>, i: NodeId, j: NodeId) -> Result<()> {
    if list.is_empty() || list.total_weight() == 0 {
        return Err(Error::NoSamples);
    }
    let n = g_nodes.unwrap_or_else(|| list.forests()[0].len());
    for node in [i, j] {
        if node.index() >= n {
            return Err(Error::NodeOutOfRange {
                node: node.index(),
                n,
            });
        }
    }
    Ok(())
}

/// Per-forest SFQ estimator `1{r_φ(i) = j}`.
#[inline]
pub fn sfq_term(f: &Forest, i: NodeId, j: NodeId) -> f64 {
    if f.resolve_root(i) == j {
        1.0
    } else {
        0.0
    }
}

/// Whether `f` scores an SFQPlus hit for `(i, j)`: off the diagonal the root
/// of `i` is `j` or an in-neighbour of `j`; on the diagonal it is an
/// in-neighbour of `i`.
#[inline]
fn sfqplus_hit(g: &Digraph, f: &Forest, i: NodeId, j: NodeId) -> bool {
    let k = f.resolve_root(i);
    (k == j && i != j) || g.has_edge(k, j)
}

/// Per-forest SFQPlus estimator `ω̄_ij(φ)`.
pub fn sfqplus_term(g: &Digraph, f: &Forest, i: NodeId, j: NodeId) -> f64 {
    let hit = sfqplus_hit(g, f, i, j) as u8 as f64;
    let dj = g.out_degree(j) as f64;
    if i == j {
        (1.0 + hit) / (1.0 + dj)
    } else {
        hit / (2.0 + dj)
    }
}

/// Per-forest in-neighbour estimator `ω̃_ij(φ) = #{r_φ(i) ∈ N⁻_j} / (1 + d_j)`,
/// the intermediate step between SFQ and SFQPlus off the diagonal.
#[cfg(feature = "internal-estimators")]
pub fn in_neighbor_term(g: &Digraph, f: &Forest, i: NodeId, j: NodeId) -> f64 {
    debug_assert!(i != j);
    let k = f.resolve_root(i);
    if g.has_edge(k, j) {
        1.0 / (1.0 + g.out_degree(j) as f64)
    } else {
        0.0
    }
}

fn weighted_hits(list: &ForestList, mut hit: impl FnMut(&Forest) -> bool) -> u64 {
    list.iter()
        .filter(|f| hit(f))
        .map(Forest::multiplicity)
        .sum()
}

/// Multiplicity-weighted mean of `1{r_φ(i) = j}`.
pub fn sfq_query(list: &ForestList, i: NodeId, j: NodeId) -> Result<EntryEstimate> {
    check_query(list, None, i, j)?;
    let hits = weighted_hits(list, |f| f.resolve_root(i) == j);
    let w = list.total_weight();
    Ok(EntryEstimate {
        value: hits as f64 / w as f64,
        sample_weight: w,
        method: Method::Sfq,
    })
}

/// Multiplicity-weighted mean of the variance-reduced estimator. Degrees and
/// in-neighbours are read from the current graph `g`.
pub fn sfqplus_query(
    g: &Digraph,
    list: &ForestList,
    i: NodeId,
    j: NodeId,
) -> Result<EntryEstimate> {
    check_query(list, Some(g.node_count()), i, j)?;
    let hits = weighted_hits(list, |f| sfqplus_hit(g, f, i, j));
    let w = list.total_weight() as f64;
    let dj = g.out_degree(j) as f64;
    let value = if i == j {
        (w + hits as f64) / ((1.0 + dj) * w)
    } else {
        hits as f64 / ((2.0 + dj) * w)
    };
    Ok(EntryEstimate {
        value,
        sample_weight: list.total_weight(),
        method: Method::SfqPlus,
    })
}

pub fn query(
    g: &Digraph,
    list: &ForestList,
    i: NodeId,
    j: NodeId,
    method: Method,
) -> Result<EntryEstimate> {
    match method {
        Method::Sfq => {
            g.check_node(i)?;
            g.check_node(j)?;
            sfq_query(list, i, j)
        }
        Method::SfqPlus => sfqplus_query(g, list, i, j),
    }
}

/// `ρ_ij = ω_ii + ω_jj − ω_ij − ω_ji` from four entry estimates. Monte-Carlo
/// noise may push the estimate slightly outside `[0, 2]`.
///
/// The distance of a node to itself is exactly 0.
pub fn forest_distance(
    g: &Digraph,
    list: &ForestList,
    i: NodeId,
    j: NodeId,
    method: Method,
) -> Result<f64> {
    g.check_node(i)?;
    g.check_node(j)?;
    if i == j {
        return Ok(0.0);
    }
    let e = |a, b| query(g, list, a, b, method).map(|x| x.value);
    Ok(e(i, i)? + e(j, j)? - e(i, j)? - e(j, i)?)
}
