use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::convolve::{Convolver, DirectConvolver};
use super::tableau::Tableau;
use crate::error::{Error, Result};
use crate::lyndon::{IndexLayout, Word3};

/// The blocks of `V_p = (z, u, λ, μ1, μ2, ν, Δ)`.
///
/// Definitions, with sums over `1 <= r, s <= p`:
///
/// ```text
/// z_j    = Σ x_{jr}/r                 u_j    = Σ y_{jr}/r²
/// λ_jk   = Σ (x_{jr}y_{kr} − y_{jr}x_{kr})/r
/// μ1_jk  = Σ x_{jr}x_{kr}/r²          μ2_jk  = Σ y_{jr}y_{kr}/r²
/// ν_jk   = Σ_{r≠s} ((r/s) x_{jr}x_{ks} + y_{jr}y_{ks}) / (r² − s²)
/// Δ_jkl  = Σ_{r+s≤p} Im[ −ξ_{jr}ξ_{ks} conj(ξ_{l,r+s})/(r(r+s))
///                        + ξ_{jr}ξ_{ls} conj(ξ_{k,r+s})/(rs)
///                        − ξ_{kr}ξ_{ls} conj(ξ_{j,r+s})/(s(r+s)) ]
/// ```
///
/// with `ξ_{jr} = x_{jr} + i y_{jr}`. `λ` and `ν` are stored for `j < k`,
/// `μ1`, `μ2` for `j <= k`, and `Δ` for Lyndon words only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialSums {
    pub q: usize,
    pub p: usize,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub nu: Vec<f64>,
    pub delta: Vec<f64>,
}

/// `Δ_{jkl}` for every index triple, stored as `q×q×q` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTensor {
    pub q: usize,
    pub values: Vec<f64>,
}

impl DeltaTensor {
    /// Zero-based accessor.
    #[inline]
    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        self.values[(j * self.q + k) * self.q + l]
    }
}

impl PartialSums {
    /// All-zero sums for alphabet size `q`.
    pub fn zeros(q: usize, p: usize) -> Self {
        let s = q * (q - 1) / 2;
        let up = q * (q + 1) / 2;
        PartialSums {
            q,
            p,
            z: vec![0.0; q],
            u: vec![0.0; q],
            lambda: vec![0.0; s],
            mu1: vec![0.0; up],
            mu2: vec![0.0; up],
            nu: vec![0.0; s],
            delta: vec![0.0; crate::lyndon::lyndon_count(q)],
        }
    }

    /// Concatenates the blocks in layout order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(crate::lyndon::dimension(self.q));
        for b in [&self.z, &self.u, &self.lambda, &self.mu1, &self.mu2, &self.nu, &self.delta] {
            v.extend_from_slice(b);
        }
        v
    }

    /// Inverse of [`PartialSums::flatten`].
    pub fn unflatten(layout: &IndexLayout, p: usize, v: &[f64]) -> Result<Self> {
        if v.len() != layout.d {
            return Err(Error::contract("flattened vector length differs from layout dimension"));
        }
        let b = layout.blocks();
        Ok(PartialSums {
            q: layout.q,
            p,
            z: v[b[0].1.clone()].to_vec(),
            u: v[b[1].1.clone()].to_vec(),
            lambda: v[b[2].1.clone()].to_vec(),
            mu1: v[b[3].1.clone()].to_vec(),
            mu2: v[b[4].1.clone()].to_vec(),
            nu: v[b[5].1.clone()].to_vec(),
            delta: v[b[6].1.clone()].to_vec(),
        })
    }

    /// `λ_jk` for any zero-based pair, using antisymmetry.
    pub fn lambda_full(&self, j: usize, k: usize) -> f64 {
        use core::cmp::Ordering::*;
        match j.cmp(&k) {
            Equal => 0.0,
            Less => self.lambda[strict_index(self.q, j, k)],
            Greater => -self.lambda[strict_index(self.q, k, j)],
        }
    }

    /// `μ1_jk` for any zero-based pair.
    pub fn mu1_full(&self, j: usize, k: usize) -> f64 {
        self.mu1[upper_index(self.q, j.min(k), j.max(k))]
    }

    /// `μ2_jk` for any zero-based pair.
    pub fn mu2_full(&self, j: usize, k: usize) -> f64 {
        self.mu2[upper_index(self.q, j.min(k), j.max(k))]
    }

    /// `ν_jk` for any zero-based pair; `ν_kj` for `j < k` comes from
    /// `ν_jk + ν_kj = z_j z_k − μ1_jk`, and the diagonal from `2ν_jj = z_j² − μ1_jj`.
    pub fn nu_full(&self, j: usize, k: usize) -> f64 {
        use core::cmp::Ordering::*;
        match j.cmp(&k) {
            Equal => 0.5 * (self.z[j] * self.z[j] - self.mu1_full(j, j)),
            Less => self.nu[strict_index(self.q, j, k)],
            Greater => {
                self.z[j] * self.z[k] - self.mu1_full(j, k) - self.nu[strict_index(self.q, k, j)]
            }
        }
    }

    /// Blockwise `self − other`.
    pub fn sub(&self, other: &PartialSums) -> PartialSums {
        let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        PartialSums {
            q: self.q,
            p: self.p,
            z: f(&self.z, &other.z),
            u: f(&self.u, &other.u),
            lambda: f(&self.lambda, &other.lambda),
            mu1: f(&self.mu1, &other.mu1),
            mu2: f(&self.mu2, &other.mu2),
            nu: f(&self.nu, &other.nu),
            delta: f(&self.delta, &other.delta),
        }
    }
}

pub(crate) fn strict_index(q: usize, j: usize, k: usize) -> usize {
    j * (2 * q - j - 1) / 2 + (k - j - 1)
}

pub(crate) fn upper_index(q: usize, j: usize, k: usize) -> usize {
    j * (2 * q - j + 1) / 2 + (k - j)
}

/// Computes `V_p` from a tableau by direct summation.
pub fn partial_sums(t: &Tableau) -> PartialSums {
    partial_sums_with(t, &mut DirectConvolver)
}

/// Computes `V_p` using the supplied convolution backend for `ν` and `Δ`.
pub fn partial_sums_with<C: Convolver + ?Sized>(t: &Tableau, conv: &mut C) -> PartialSums {
    let q = t.q;
    let p = t.p;
    let mut s = PartialSums::zeros(q, p);
    let inv: Vec<f64> = (1..=p).map(|r| 1.0 / r as f64).collect();
    for j in 0..q {
        let (xj, yj) = (t.x_row(j), t.y_row(j));
        s.z[j] = xj.iter().zip(&inv).map(|(a, w)| a * w).sum();
        s.u[j] = yj.iter().zip(&inv).map(|(a, w)| a * w * w).sum();
        for k in j..q {
            let (xk, yk) = (t.x_row(k), t.y_row(k));
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            let mut la = 0.0;
            for r in 0..p {
                let w = inv[r];
                m1 += xj[r] * xk[r] * w * w;
                m2 += yj[r] * yk[r] * w * w;
                la += (xj[r] * yk[r] - yj[r] * xk[r]) * w;
            }
            s.mu1[upper_index(q, j, k)] = m1;
            s.mu2[upper_index(q, j, k)] = m2;
            if j < k {
                s.lambda[strict_index(q, j, k)] = la;
            }
        }
    }
    for j in 0..q {
        for k in j + 1..q {
            s.nu[strict_index(q, j, k)] = nu_pair(t, j, k, conv);
        }
    }
    let words = crate::lyndon::enumerate_lyndon3(q).expect("q >= 1");
    let triples: Vec<(usize, usize, usize)> = words.iter().map(Word3::zero_based).collect();
    s.delta = delta_values(t, &triples, conv);
    s
}

/// `ν_jk` (zero-based, any order) through the Toeplitz-plus-Hankel product.
pub fn nu_pair<C: Convolver + ?Sized>(t: &Tableau, j: usize, k: usize, conv: &mut C) -> f64 {
    let p = t.p;
    let c: Vec<Complex64> = (1..=p)
        .map(|s| Complex64::new(t.xv(k, s) / (2.0 * s as f64), t.yv(k, s)))
        .collect();
    let th = conv.toeplitz_hankel(&c);
    let mut acc = 0.0;
    for r in 1..=p {
        let v = th[r - 1] - c[r - 1] / (2 * r) as f64;
        acc += t.xv(j, r) * v.re + t.yv(j, r) / (2 * r) as f64 * v.im;
    }
    acc
}

/// `Δ_{jkl}` for the requested zero-based triples.
pub fn delta_values<C: Convolver + ?Sized>(
    t: &Tableau,
    triples: &[(usize, usize, usize)],
    conv: &mut C,
) -> Vec<f64> {
    let q = t.q;
    let p = t.p;
    if p < 2 || triples.is_empty() {
        return vec![0.0; triples.len()];
    }
    // seqs[a] = ξ_a, seqs[q + a] = ξ_a / r.
    let xi: Vec<Vec<Complex64>> = (0..q).map(|a| t.xi(a)).collect();
    let xi_r: Vec<Vec<Complex64>> = xi
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, z)| z / (i + 1) as f64).collect())
        .collect();
    let mut seqs: Vec<&[Complex64]> = Vec::with_capacity(2 * q);
    seqs.extend(xi.iter().map(|v| v.as_slice()));
    seqs.extend(xi_r.iter().map(|v| v.as_slice()));

    // P[a][b] = conv(ξ_a/r, ξ_b), Q[a][b] = conv(ξ_a/r, ξ_b/r) with a <= b.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut need = |pr: (usize, usize)| {
        if !pairs.contains(&pr) {
            pairs.push(pr);
        }
    };
    for &(j, k, l) in triples {
        need((q + j, k));
        need((q + j.min(l), q + j.max(l)));
        need((q + l, k));
    }
    let len = p - 1;
    let results = conv.convolve_pairs(&seqs, &pairs, len);
    let lookup = |pr: (usize, usize)| &results[pairs.iter().position(|x| *x == pr).unwrap()];

    triples
        .iter()
        .map(|&(j, k, l)| {
            let pa = lookup((q + j, k));
            let qa = lookup((q + j.min(l), q + j.max(l)));
            let pc = lookup((q + l, k));
            let mut acc = 0.0;
            // conv index i corresponds to r + s = i + 2.
            for i in 0..len {
                let tt = i + 2;
                let tw = 1.0 / tt as f64;
                let term = -pa[i] * xi[l][tt - 1].conj() * tw + qa[i] * xi[k][tt - 1].conj()
                    - pc[i] * xi[j][tt - 1].conj() * tw;
                acc += term.im;
            }
            acc
        })
        .collect()
}

/// `Δ_{jkl}` for all triples.
pub fn delta_tensor<C: Convolver + ?Sized>(t: &Tableau, conv: &mut C) -> DeltaTensor {
    let q = t.q;
    let mut triples = Vec::with_capacity(q * q * q);
    for j in 0..q {
        for k in 0..q {
            for l in 0..q {
                triples.push((j, k, l));
            }
        }
    }
    DeltaTensor { q, values: delta_values(t, &triples, conv) }
}
