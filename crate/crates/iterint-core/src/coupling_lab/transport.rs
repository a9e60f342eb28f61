use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{channel, tag, unit_vector};

/// Largest sample count accepted by [`wasserstein2_exact`].
pub const EXACT_MAX_SAMPLES: usize = 2048;

/// Smallest projection count accepted by [`sliced_w2`].
pub const MIN_PROJECTIONS: usize = 16;

fn check_samples(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::domain(alloc::format!("sample counts differ: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::domain("empty samples"));
    }
    let d = a[0].len();
    if a.iter().chain(b).any(|row| row.len() != d) {
        return Err(Error::contract("sample rows have inconsistent dimension"));
    }
    Ok(d)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Empirical `W₂` between two equally weighted samples of equal size,
/// `√(min_σ (1/n) Σ |A_i − B_σ(i)|²)`, via an exact assignment solve.
pub fn wasserstein2_exact(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check_samples(a, b)?;
    let n = a.len();
    if n > EXACT_MAX_SAMPLES {
        return Err(Error::domain(alloc::format!("exact transport is limited to {EXACT_MAX_SAMPLES} samples")));
    }
    let cost: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| sq_dist(x, y))).collect();
    let assign = min_cost_assignment(n, &cost);
    let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok(libm::sqrt((total / n as f64).max(0.0)))
}

/// Shortest-augmenting-path assignment with row and column potentials.
/// `cost` is row-major `n×n`; returns the column assigned to each row.
pub fn min_cost_assignment(n: usize, cost: &[f64]) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}

/// Squared 1-D `W₂` between equally sized samples by sorted matching.
pub fn w2_squared_1d(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Sliced `W₂` with its standard error over projections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicedEstimate {
    pub value: f64,
    pub se: f64,
    /// Per-projection squared distances are summarized by their mean.
    pub mean_square: f64,
    pub projections: usize,
}

/// Direction `k` of the projection family keyed by `seed`.
pub fn projection_direction(seed: u64, k: usize, d: usize) -> Vec<f64> {
    unit_vector(seed, k as u64, channel(tag::DIRECTION, 0), d)
}

/// Squared 1-D distance along direction `k`.
pub fn sliced_term(a: &[Vec<f64>], b: &[Vec<f64>], seed: u64, k: usize) -> f64 {
    let d = a[0].len();
    let theta = projection_direction(seed, k, d);
    let proj = |s: &[Vec<f64>]| -> Vec<f64> { s.iter().map(|r| r.iter().zip(&theta).map(|(x, t)| x * t).sum()).collect() };
    let (mut pa, mut pb) = (proj(a), proj(b));
    w2_squared_1d(&mut pa, &mut pb)
}

/// Combines per-projection squared distances into a [`SlicedEstimate`].
///
/// The standard error of the root is propagated from that of the mean by
/// the delta method.
pub fn sliced_from_terms(terms: &[f64]) -> SlicedEstimate {
    let k = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / k;
    let var = if terms.len() > 1 { terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    let se_mean = libm::sqrt(var / k);
    let value = libm::sqrt(mean.max(0.0));
    let se = if value > 0.0 { se_mean / (2.0 * value) } else { libm::sqrt(se_mean) };
    SlicedEstimate { value, se, mean_square: mean, projections: terms.len() }
}

/// Root-mean over uniformly random unit directions of the squared 1-D `W₂`
/// between the projected samples.
pub fn sliced_w2(a: &[Vec<f64>], b: &[Vec<f64>], projections: usize, seed: u64) -> Result<SlicedEstimate> {
    check_samples(a, b)?;
    if projections < MIN_PROJECTIONS {
        return Err(Error::domain(alloc::format!("sliced W2 needs at least {MIN_PROJECTIONS} projections")));
    }
    let terms: Vec<f64> = (0..projections).map(|k| sliced_term(a, b, seed, k)).collect();
    Ok(sliced_from_terms(&terms))
}
