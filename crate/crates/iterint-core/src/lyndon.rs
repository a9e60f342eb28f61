//! Lyndon words of length three and the flattened index layout of `V_p`.
//!
//! A triple `(j,k,l)` over the ordered alphabet `{1..q}` is a Lyndon word iff
//! `j < min(k,l)` or `j = k < l`. There are `(q^3 - q)/3` of them, and the
//! vector `V_p = (z, u, λ, μ1, μ2, ν, Δ)` has dimension
//! `d = 2q^2 + 2q + (q^3 - q)/3`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A word of length three over `{1..q}`; components are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word3 {
    pub j: usize,
    pub k: usize,
    pub l: usize,
}

impl Word3 {
    pub const fn new(j: usize, k: usize, l: usize) -> Self {
        Word3 { j, k, l }
    }

    /// Zero-based component triple.
    pub const fn zero_based(&self) -> (usize, usize, usize) {
        (self.j - 1, self.k - 1, self.l - 1)
    }

    fn check(&self, q: usize) -> Result<()> {
        for c in [self.j, self.k, self.l] {
            if c == 0 || c > q {
                return Err(Error::domain(format!(
                    "word component {c} outside 1..={q}"
                )));
            }
        }
        Ok(())
    }
}

/// Lyndon predicate for a triple over `{1..q}`.
pub fn is_lyndon3(w: Word3, q: usize) -> Result<bool> {
    w.check(q)?;
    Ok(is_lyndon3_unchecked(w))
}

/// Lyndon predicate without a range check; components must be positive.
pub fn is_lyndon3_unchecked(w: Word3) -> bool {
    w.j < w.k.min(w.l) || (w.j == w.k && w.k < w.l)
}

/// All Lyndon words of length three over `{1..q}` in lexicographic order.
pub fn enumerate_lyndon3(q: usize) -> Result<Vec<Word3>> {
    if q == 0 {
        return Err(Error::domain("alphabet size q must be positive"));
    }
    let mut out = Vec::with_capacity(lyndon_count(q));
    for j in 1..=q {
        for k in 1..=q {
            for l in 1..=q {
                let w = Word3::new(j, k, l);
                if is_lyndon3_unchecked(w) {
                    out.push(w);
                }
            }
        }
    }
    Ok(out)
}

/// `(q^3 - q)/3`, the number of Lyndon words of length three.
pub const fn lyndon_count(q: usize) -> usize {
    (q * q * q - q) / 3
}

/// `2q^2 + 2q + (q^3 - q)/3`, the dimension of `V_p`.
pub const fn dimension(q: usize) -> usize {
    2 * q * q + 2 * q + lyndon_count(q)
}

/// Offsets of the blocks of the flattened `V_p` vector.
///
/// Block order is `z, u, λ, μ1, μ2, ν, Δ`. Strict upper triangles (`λ`, `ν`)
/// are stored row-major over `j < k`; upper triangles with diagonal (`μ1`,
/// `μ2`) row-major over `j <= k`; `Δ` follows [`enumerate_lyndon3`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexLayout {
    pub q: usize,
    pub d: usize,
    pub z: usize,
    pub u: usize,
    pub lambda: usize,
    pub mu1: usize,
    pub mu2: usize,
    pub nu: usize,
    pub delta: usize,
    pub words: Vec<Word3>,
}

impl IndexLayout {
    /// Layout for alphabet size `q`.
    pub fn new(q: usize) -> Result<Self> {
        let words = enumerate_lyndon3(q)?;
        let strict = q * (q - 1) / 2;
        let upper = q * (q + 1) / 2;
        let z = 0;
        let u = z + q;
        let lambda = u + q;
        let mu1 = lambda + strict;
        let mu2 = mu1 + upper;
        let nu = mu2 + upper;
        let delta = nu + strict;
        let d = delta + words.len();
        debug_assert_eq!(d, dimension(q));
        Ok(IndexLayout { q, d, z, u, lambda, mu1, mu2, nu, delta, words })
    }

    /// Named block ranges in storage order.
    pub fn blocks(&self) -> [(&'static str, Range<usize>); 7] {
        [
            ("z", self.z..self.u),
            ("u", self.u..self.lambda),
            ("lambda", self.lambda..self.mu1),
            ("mu1", self.mu1..self.mu2),
            ("mu2", self.mu2..self.nu),
            ("nu", self.nu..self.delta),
            ("delta", self.delta..self.d),
        ]
    }

    /// Position of the pair `j < k` (zero-based) inside a strict upper triangle.
    pub fn strict_index(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < k && k < self.q);
        j * (2 * self.q - j - 1) / 2 + (k - j - 1)
    }

    /// Position of the pair `j <= k` (zero-based) inside an upper triangle.
    pub fn upper_index(&self, j: usize, k: usize) -> usize {
        debug_assert!(j <= k && k < self.q);
        j * (2 * self.q - j + 1) / 2 + (k - j)
    }

    /// Position of a Lyndon word inside the `Δ` block.
    pub fn word_index(&self, w: Word3) -> Option<usize> {
        self.words.binary_search(&w).ok()
    }

    /// Human-readable coordinate label such as `lambda[1,2]` or `delta[1,1,2]`.
    pub fn label(&self, idx: usize) -> alloc::string::String {
        let q = self.q;
        let pairs = |upper: bool| {
            let mut v = Vec::new();
            for j in 0..q {
                let start = if upper { j } else { j + 1 };
                for k in start..q {
                    v.push((j + 1, k + 1));
                }
            }
            v
        };
        for (name, range) in self.blocks() {
            if range.contains(&idx) {
                let o = idx - range.start;
                return match name {
                    "z" | "u" => format!("{name}[{}]", o + 1),
                    "lambda" | "nu" => {
                        let (j, k) = pairs(false)[o];
                        format!("{name}[{j},{k}]")
                    }
                    "mu1" | "mu2" => {
                        let (j, k) = pairs(true)[o];
                        format!("{name}[{j},{k}]")
                    }
                    _ => {
                        let w = self.words[o];
                        format!("delta[{},{},{}]", w.j, w.k, w.l)
                    }
                };
            }
        }
        format!("out_of_range[{idx}]")
    }
}

/// Layout for alphabet size `q`.
pub fn layout(q: usize) -> Result<IndexLayout> {
    IndexLayout::new(q)
}
