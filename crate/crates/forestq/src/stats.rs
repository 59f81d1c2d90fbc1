//! Goodness-of-fit tests used by `validate` and the acceptance suite.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).unwrap().sf(stat)
}

/// Pearson test of `counts` against the uniform law; returns the p-value.
pub fn uniform_chi_square_p(counts: &[f64]) -> f64 {
    if counts.len() < 2 {
        return 1.0;
    }
    let total: f64 = counts.iter().sum();
    let expected = total / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c - expected).powi(2) / expected)
        .sum();
    chi_square_sf(stat, counts.len() - 1)
}

/// Wald test that i.i.d. contribution vectors have a mean with all `k`
/// components equal.
///
/// Each sample is a sparse list of `(class, weight)` pairs. The statistic
/// uses the `k - 1` contrasts against the last class and their empirical
/// covariance; contrasts with no variance must have zero mean and are
/// dropped from the degrees of freedom.
pub fn wald_uniform_p(samples: &[Vec<(usize, f64)>], k: usize) -> f64 {
    if k < 2 || samples.len() < 2 {
        return 1.0;
    }
    let n = samples.len() as f64;
    let mut mean = vec![0.0; k];
    let mut second = vec![0.0; k * k];
    let mut merged: Vec<(usize, f64)> = Vec::new();
    for s in samples {
        merged.clear();
        for &(c, w) in s {
            match merged.iter_mut().find(|(x, _)| *x == c) {
                Some((_, acc)) => *acc += w,
                None => merged.push((c, w)),
            }
        }
        for &(a, wa) in &merged {
            mean[a] += wa;
            for &(b, wb) in &merged {
                second[a * k + b] += wa * wb;
            }
        }
    }
    finish_wald(mean, second, n, k)
}

fn finish_wald(mut mean: Vec<f64>, second: Vec<f64>, n: f64, k: usize) -> f64 {
    mean.iter_mut().for_each(|m| *m /= n);
    let cov = |a: usize, b: usize| (second[a * k + b] / n - mean[a] * mean[b]) * n / (n - 1.0);
    let d = k - 1;
    let c: Vec<f64> = (0..d).map(|a| mean[a] - mean[d]).collect();
    let mut m = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            m[a * d + b] = cov(a, b) - cov(a, d) - cov(d, b) + cov(d, d);
        }
    }
    let (stat, rank) = pivoted_quadratic_form(&mut m, c, d);
    chi_square_sf(n * stat, rank)
}

/// `cᵀ M⁺ c` for positive semi-definite `m` by symmetric pivoted elimination,
/// with the numerical rank of `m`.
fn pivoted_quadratic_form(m: &mut [f64], mut c: Vec<f64>, d: usize) -> (f64, usize) {
    let scale = (0..d).map(|k| m[k * d + k]).fold(0.0, f64::max);
    let mut live: Vec<usize> = (0..d).collect();
    let (mut stat, mut rank) = (0.0, 0);
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
    if live.iter().any(|&r| c[r].abs() > 1e-9) {
        return (f64::INFINITY, rank.max(1));
    }
    (stat, rank)
}
