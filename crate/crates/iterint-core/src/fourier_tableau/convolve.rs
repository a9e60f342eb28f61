//! Convolution backends used by the partial-sum kernels.
//!
//! The `ν` and `Δ` blocks are discrete convolutions of coefficient
//! sequences. [`DirectConvolver`] evaluates them by definition in `O(n^2)`;
//! faster transform-based backends implement the same trait.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Linear convolutions and the `ν` Toeplitz-plus-Hankel product.
pub trait Convolver {
    /// For every `(a, b)` in `pairs`, returns `out[t] = Σ_{i+j=t} seqs[a][i]·seqs[b][j]`
    /// for `t < len`.
    fn convolve_pairs(
        &mut self,
        seqs: &[&[Complex64]],
        pairs: &[(usize, usize)],
        len: usize,
    ) -> Vec<Vec<Complex64>>;

    /// With `a[s-1] = a_s` for `s = 1..=n`, returns `out[r-1]` equal to
    /// `Σ_{s≠r} a_s/(r-s) + Σ_s a_s/(r+s)` for `r = 1..=n`.
    fn toeplitz_hankel(&mut self, a: &[Complex64]) -> Vec<Complex64>;
}

/// Evaluates every convolution by direct summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectConvolver;

impl Convolver for DirectConvolver {
    fn convolve_pairs(
        &mut self,
        seqs: &[&[Complex64]],
        pairs: &[(usize, usize)],
        len: usize,
    ) -> Vec<Vec<Complex64>> {
        pairs
            .iter()
            .map(|&(ia, ib)| {
                let (a, b) = (seqs[ia], seqs[ib]);
                let mut out = vec![Complex64::new(0.0, 0.0); len];
                for (i, &ai) in a.iter().enumerate().take(len) {
                    for (j, &bj) in b.iter().enumerate().take(len - i) {
                        out[i + j] += ai * bj;
                    }
                }
                out
            })
            .collect()
    }

    fn toeplitz_hankel(&mut self, a: &[Complex64]) -> Vec<Complex64> {
        let n = a.len();
        (1..=n)
            .map(|r| {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 1..=n {
                    let v = a[s - 1];
                    if s != r {
                        acc += v / (r as f64 - s as f64);
                    }
                    acc += v / (r + s) as f64;
                }
                acc
            })
            .collect()
    }
}
