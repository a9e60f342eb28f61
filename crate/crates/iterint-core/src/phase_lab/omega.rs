use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_tableau::sums::{strict_index, upper_index};
use crate::lyndon::{enumerate_lyndon3, IndexLayout, Word3};

/// Dual coefficients `ω` pairing with `V_p`.
///
/// The blocks follow the layout of the flattened partial sums: `a ↔ z`,
/// `b ↔ u`, `alpha ↔ λ`, `beta1 ↔ μ1`, `beta2 ↔ μ2`, `gamma ↔ ν`, `rho ↔ Δ`.
/// `alpha` and `gamma` hold the strict upper triangle, `beta1` and `beta2` the
/// upper triangle including the diagonal, and `rho` one entry per Lyndon word.
/// The accessors extend them to all index pairs: `α_kj = −α_jk`,
/// `β_kj = β_jk`, `γ_jk = 0` for `j >= k`, and `ρ_jkl = 0` off Lyndon words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omega {
    pub q: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    pub words: Vec<Word3>,
}

impl Omega {
    /// The zero vector for alphabet size `q`.
    pub fn zeros(q: usize) -> Result<Self> {
        let words = enumerate_lyndon3(q)?;
        let (s, u) = (q * (q - 1) / 2, q * (q + 1) / 2);
        Ok(Omega {
            q,
            a: vec![0.0; q],
            b: vec![0.0; q],
            alpha: vec![0.0; s],
            beta1: vec![0.0; u],
            beta2: vec![0.0; u],
            gamma: vec![0.0; s],
            rho: vec![0.0; words.len()],
            words,
        })
    }

    /// Splits a flattened vector of length `d` into blocks.
    pub fn from_flat(q: usize, v: &[f64]) -> Result<Self> {
        let layout = IndexLayout::new(q)?;
        if v.len() != layout.d {
            return Err(Error::contract(alloc::format!(
                "omega has length {} but the dimension for q = {q} is {}",
                v.len(),
                layout.d
            )));
        }
        let b = layout.blocks();
        Ok(Omega {
            q,
            a: v[b[0].1.clone()].to_vec(),
            b: v[b[1].1.clone()].to_vec(),
            alpha: v[b[2].1.clone()].to_vec(),
            beta1: v[b[3].1.clone()].to_vec(),
            beta2: v[b[4].1.clone()].to_vec(),
            gamma: v[b[5].1.clone()].to_vec(),
            rho: v[b[6].1.clone()].to_vec(),
            words: layout.words,
        })
    }

    /// The unit vector on flattened coordinate `idx`.
    pub fn unit(q: usize, idx: usize) -> Result<Self> {
        let d = crate::lyndon::dimension(q);
        if idx >= d {
            return Err(Error::domain(alloc::format!("coordinate {idx} outside 0..{d}")));
        }
        let mut v = vec![0.0; d];
        v[idx] = 1.0;
        Self::from_flat(q, &v)
    }

    /// Concatenates the blocks in layout order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for blk in [&self.a, &self.b, &self.alpha, &self.beta1, &self.beta2, &self.gamma, &self.rho] {
            v.extend_from_slice(blk);
        }
        v
    }

    /// Euclidean norm of the flattened vector.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.flatten().iter().map(|x| x * x).sum())
    }

    /// `α_jk` for zero-based indices, extended antisymmetrically.
    pub fn alpha_at(&self, j: usize, k: usize) -> f64 {
        use core::cmp::Ordering::*;
        match j.cmp(&k) {
            Equal => 0.0,
            Less => self.alpha[strict_index(self.q, j, k)],
            Greater => -self.alpha[strict_index(self.q, k, j)],
        }
    }

    /// `β⁽¹⁾_jk`, extended symmetrically.
    pub fn beta1_at(&self, j: usize, k: usize) -> f64 {
        self.beta1[upper_index(self.q, j.min(k), j.max(k))]
    }

    /// `β⁽²⁾_jk`, extended symmetrically.
    pub fn beta2_at(&self, j: usize, k: usize) -> f64 {
        self.beta2[upper_index(self.q, j.min(k), j.max(k))]
    }

    /// `γ_jk`, zero unless `j < k`.
    pub fn gamma_at(&self, j: usize, k: usize) -> f64 {
        if j < k {
            self.gamma[strict_index(self.q, j, k)]
        } else {
            0.0
        }
    }

    /// `ρ_jkl` for zero-based indices, zero unless `(j+1, k+1, l+1)` is a Lyndon word.
    pub fn rho_at(&self, j: usize, k: usize, l: usize) -> f64 {
        let w = Word3::new(j + 1, k + 1, l + 1);
        self.words.iter().position(|x| *x == w).map_or(0.0, |i| self.rho[i])
    }
}
