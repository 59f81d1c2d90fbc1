//! Exact ground truth for small graphs: the dense forest matrix, a
//! residual-checked column solver for mid-size graphs, and brute-force
//! forest enumeration.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::forest::{Forest, NO_SUCCESSOR};
use crate::graph::{Digraph, NodeId};

/// Largest `n` accepted by [`exact_forest_matrix`].
pub const MAX_DENSE_NODES: usize = 2000;
/// Largest `Π (1 + d_i)` accepted by [`enumerate_forests`].
pub const MAX_ENUMERATION_SPACE: u128 = 10_000_000;

/// Row-major `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `I + L` with the out-degree Laplacian `L = D − A`.
pub fn regularized_laplacian(g: &Digraph) -> DenseMatrix {
    let n = g.node_count();
    let mut m = DenseMatrix::identity(n);
    for i in g.nodes() {
        let ii = i.index();
        m.set(ii, ii, 1.0 + g.out_degree(i) as f64);
        for &j in g.out_neighbors(i) {
            m.set(ii, j.index(), -1.0);
        }
    }
    m
}

/// LU factorisation with partial pivoting, `PA = LU`, stored in place.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &DenseMatrix) -> Result<Lu> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, x| if x.1 > best.1 { x } else { best });
            if pivot.is_nan() || pivot <= 1e-300 {
                return Err(Error::Numeric("singular matrix in LU factorisation"));
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let inv = 1.0 / lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] * inv;
                if factor == 0.0 {
                    continue;
                }
                lu[r * n + k] = factor;
                for c in (k + 1)..n {
                    lu[r * n + c] -= factor * lu[k * n + c];
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            x[i] = b[self.perm[i]] - row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum::<f64>();
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = x[i] - row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum::<f64>();
            x[i] = s / self.lu[i * n + i];
        }
    }
}

/// `Ω = (I + L)⁻¹` by dense LU with partial pivoting.
pub fn exact_forest_matrix(g: &Digraph) -> Result<DenseMatrix> {
    let n = g.node_count();
    if n > MAX_DENSE_NODES {
        return Err(Error::TooLargeForDense(n));
    }
    let lu = Lu::factor(&regularized_laplacian(g))?;
    let mut omega = DenseMatrix::zeros(n);
    let mut e = vec![0.0; n];
    let mut x = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        lu.solve(&e, &mut x);
        for (i, &v) in x.iter().enumerate() {
            omega.set(i, j, v);
        }
    }
    if omega.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite entry in forest matrix"));
    }
    Ok(omega)
}

/// Column `j` of `Ω` (entries `ω_kj` for all `k`) by Gauss–Seidel on
/// `(I + L) x = e_j`, for graphs too large for a dense solve.
///
/// `I + L` is strictly row diagonally dominant so the iteration converges.
/// It stops once the residual max-norm is at most `tol`; since `Ω` is row
/// stochastic, `‖Ω‖∞ = 1` and the entrywise error is bounded by the same
/// `tol`.
pub fn forest_matrix_column(g: &Digraph, j: NodeId, tol: f64) -> Result<Vec<f64>> {
    g.check_node(j)?;
    let n = g.node_count();
    let jj = j.index();
    let mut x = vec![0.0; n];
    let residual = |x: &[f64]| -> f64 {
        g.nodes()
            .map(|k| {
                let kk = k.index();
                let mut r = (1.0 + g.out_degree(k) as f64) * x[kk];
                for &t in g.out_neighbors(k) {
                    r -= x[t.index()];
                }
                if kk == jj {
                    r -= 1.0;
                }
                r.abs()
            })
            .fold(0.0, f64::max)
    };
    const MAX_SWEEPS: usize = 100_000;
    for sweep in 0..MAX_SWEEPS {
        for k in g.nodes() {
            let kk = k.index();
            let mut s = if kk == jj { 1.0 } else { 0.0 };
            for &t in g.out_neighbors(k) {
                s += x[t.index()];
            }
            x[kk] = s / (1.0 + g.out_degree(k) as f64);
        }
        if sweep % 8 == 7 && residual(&x) <= tol {
            return Ok(x);
        }
    }
    if residual(&x) <= tol {
        Ok(x)
    } else {
        Err(Error::Numeric("Gauss-Seidel did not reach the tolerance"))
    }
}

/// Every spanning converging forest of a small graph, with `|F_ij|` counts.
#[derive(Clone, Debug)]
pub struct ForestSet {
    n: usize,
    encodings: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    /// `|F_ij|`, row-major.
    counts: Vec<u64>,
}

impl ForestSet {
    pub fn len(&self) -> usize {
        self.encodings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encodings.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Canonical encodings (see [`Forest::encoding`]).
    pub fn encodings(&self) -> &[Vec<u32>] {
        &self.encodings
    }

    pub fn index_of(&self, encoding: &[u32]) -> Option<usize> {
        self.index.get(encoding).copied()
    }

    pub fn position(&self, f: &Forest) -> Option<usize> {
        self.index_of(&f.encoding())
    }

    pub fn forest(&self, k: usize) -> Forest {
        Forest::from_raw(self.encodings[k].clone()).expect("enumerated forests are acyclic")
    }

    /// `|F_ij|`: forests in which `i` is rooted at `j`.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    /// `|F_ij| / |F|`.
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.len() as f64
    }
}

/// Brute-force enumeration: each node picks "root" or one out-edge, and
/// assignments closing a directed cycle are pruned as soon as they appear.
pub fn enumerate_forests(g: &Digraph) -> Result<ForestSet> {
    let space = g.assignment_space();
    if space > MAX_ENUMERATION_SPACE {
        return Err(Error::TooLargeToEnumerate(space));
    }
    let n = g.node_count();
    let mut set = ForestSet {
        n,
        encodings: Vec::new(),
        index: HashMap::new(),
        counts: vec![0; n * n],
    };
    let mut succ = vec![NO_SUCCESSOR; n];
    let mut stamp = vec![0u32; n];
    let mut generation = 0u32;
    extend(g, 0, &mut succ, &mut stamp, &mut generation, &mut set);
    Ok(set)
}

/// Whether giving node `i` the successor `s` closes a cycle, considering
/// only the already-assigned nodes `0..i`.
fn closes_cycle(succ: &[u32], i: usize, s: u32, stamp: &mut [u32], generation: &mut u32) -> bool {
    *generation += 1;
    let mut x = s as usize;
    loop {
        if x == i {
            return true;
        }
        if x > i || succ[x] == NO_SUCCESSOR || stamp[x] == *generation {
            return false;
        }
        stamp[x] = *generation;
        x = succ[x] as usize;
    }
}

fn extend(
    g: &Digraph,
    i: usize,
    succ: &mut Vec<u32>,
    stamp: &mut [u32],
    generation: &mut u32,
    set: &mut ForestSet,
) {
    let n = g.node_count();
    if i == n {
        let f = Forest::from_raw(succ.clone()).expect("cycle-free by construction");
        for a in 0..n {
            let r = f.resolve_root(NodeId::new(a)).index();
            set.counts[a * n + r] += 1;
        }
        set.index.insert(succ.clone(), set.encodings.len());
        set.encodings.push(succ.clone());
        return;
    }
    succ[i] = NO_SUCCESSOR;
    extend(g, i + 1, succ, stamp, generation, set);
    for &t in g.out_neighbors(NodeId::new(i)) {
        if !closes_cycle(succ, i, t.index() as u32, stamp, generation) {
            succ[i] = t.index() as u32;
            extend(g, i + 1, succ, stamp, generation, set);
        }
    }
    succ[i] = NO_SUCCESSOR;
}

/// One failed check in a [`CrossCheckReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub check: &'static str,
    pub i: usize,
    pub j: usize,
    pub expected: f64,
    pub actual: f64,
}

/// Outcome of comparing the two oracles and the forest-matrix bounds.
#[derive(Clone, Debug)]
pub struct CrossCheckReport {
    pub n: usize,
    pub forest_count: usize,
    pub max_abs_diff: f64,
    pub max_row_sum_error: f64,
    pub mismatches: Vec<Mismatch>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// One line per mismatch, `check,i,j,expected,actual`.
    pub fn mismatch_lines(&self) -> Vec<String> {
        self.mismatches
            .iter()
            .map(|m| {
                format!(
                    "{},{},{},{:.17e},{:.17e}",
                    m.check, m.i, m.j, m.expected, m.actual
                )
            })
            .collect()
    }
}

/// Tolerance for the enumeration/dense-solve comparison and row sums.
pub const ORACLE_TOL: f64 = 1e-10;
const BOUND_SLACK: f64 = 1e-12;

/// Checks `|F_ij|/|F| = Ω_ij`, row stochasticity, `0 ≤ Ω_ji < Ω_ii ≤ 1`,
/// `1/(1+d_i) ≤ Ω_ii ≤ 2/(2+d_i)` and `Ω_ij ≤ 1/(2+d_j)` for `i ≠ j`.
pub fn cross_check(g: &Digraph) -> Result<CrossCheckReport> {
    let omega = exact_forest_matrix(g)?;
    let forests = enumerate_forests(g)?;
    let n = g.node_count();
    let mut mismatches = Vec::new();
    let mut max_abs_diff: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let ratio = forests.ratio(i, j);
            let w = omega.get(i, j);
            let diff = (ratio - w).abs();
            max_abs_diff = max_abs_diff.max(diff);
            if diff.is_nan() || diff > ORACLE_TOL {
                mismatches.push(Mismatch {
                    check: "enumeration_vs_dense",
                    i,
                    j,
                    expected: ratio,
                    actual: w,
                });
            }
        }
    }
    let mut max_row_sum_error: f64 = 0.0;
    for (i, s) in omega.row_sums().into_iter().enumerate() {
        max_row_sum_error = max_row_sum_error.max((s - 1.0).abs());
        if s.is_nan() || (s - 1.0).abs() > ORACLE_TOL {
            mismatches.push(Mismatch {
                check: "row_sum",
                i,
                j: i,
                expected: 1.0,
                actual: s,
            });
        }
    }
    for i in 0..n {
        let d = g.out_degree(NodeId::new(i)) as f64;
        let wii = omega.get(i, i);
        let lo = 1.0 / (1.0 + d);
        let hi = 2.0 / (2.0 + d);
        if wii < lo - BOUND_SLACK || wii > hi + BOUND_SLACK || wii > 1.0 + BOUND_SLACK {
            mismatches.push(Mismatch {
                check: "diagonal_bounds",
                i,
                j: i,
                expected: lo,
                actual: wii,
            });
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let wji = omega.get(j, i);
            if wji.is_nan() || wji < -BOUND_SLACK || wji >= wii {
                mismatches.push(Mismatch {
                    check: "column_dominance",
                    i: j,
                    j: i,
                    expected: wii,
                    actual: wji,
                });
            }
            let dj = g.out_degree(NodeId::new(j)) as f64;
            let wij = omega.get(i, j);
            if wij > 1.0 / (2.0 + dj) + BOUND_SLACK {
                mismatches.push(Mismatch {
                    check: "off_diagonal_bound",
                    i,
                    j,
                    expected: 1.0 / (2.0 + dj),
                    actual: wij,
                });
            }
        }
    }
    Ok(CrossCheckReport {
        n,
        forest_count: forests.len(),
        max_abs_diff,
        max_row_sum_error,
        mismatches,
    })
}
