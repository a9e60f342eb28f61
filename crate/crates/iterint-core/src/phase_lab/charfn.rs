use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_tableau::{partial_sums_with, sample_tableau, Convolver, DirectConvolver};

/// Minimum sample count accepted by the estimator.
pub const MIN_SAMPLES: u64 = 1000;

/// Number of contiguous blocks used for the delete-one-block jackknife.
pub const JACKKNIFE_BLOCKS: u64 = 100;

/// Monte Carlo estimate of `ψ_p(ξ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharfnEstimate {
    pub re: f64,
    pub im: f64,
    /// Jackknife standard error of the complex mean (both parts combined).
    pub se: f64,
    pub samples: u64,
}

impl CharfnEstimate {
    /// `|ψ̂|`.
    pub fn modulus(&self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

/// The fixed block partition of `0..samples`; it depends only on `samples`.
pub fn charfn_blocks(samples: u64) -> Vec<Range<u64>> {
    let nb = JACKKNIFE_BLOCKS.min(samples.max(1));
    (0..nb).map(|b| (b * samples / nb)..((b + 1) * samples / nb)).collect()
}

/// `Σ exp(i⟨ξ, V_p⟩)` over the samples with indices in `range`, for each
/// frequency vector in `xis`. The same samples serve every frequency.
///
/// Sample `i` is the tableau drawn with `(seed, stream = i)`.
pub fn charfn_block<C: Convolver + ?Sized>(
    q: usize,
    p: usize,
    xis: &[Vec<f64>],
    seed: u64,
    range: Range<u64>,
    conv: &mut C,
) -> Result<Vec<Complex64>> {
    let d = crate::lyndon::dimension(q);
    if xis.iter().any(|xi| xi.len() != d) {
        return Err(Error::contract("frequency vector length differs from the dimension"));
    }
    let mut acc = alloc::vec![Complex64::new(0.0, 0.0); xis.len()];
    for i in range {
        let t = sample_tableau(q, p, seed, i)?;
        let v = partial_sums_with(&t, conv).flatten();
        for (a, xi) in acc.iter_mut().zip(xis) {
            let phase: f64 = v.iter().zip(xi).map(|(x, y)| x * y).sum();
            let (s, c) = libm::sincos(phase);
            *a += Complex64::new(c, s);
        }
    }
    Ok(acc)
}

/// Combines block sums into the estimate and its jackknife standard error.
pub fn charfn_from_blocks(blocks: &[Range<u64>], sums: &[Complex64]) -> CharfnEstimate {
    let n: u64 = blocks.iter().map(|b| b.end - b.start).sum();
    let total: Complex64 = sums.iter().sum();
    let mean = total / n as f64;
    let g = blocks.len();
    let se = if g < 2 {
        0.0
    } else {
        let loo: Vec<Complex64> = blocks
            .iter()
            .zip(sums)
            .map(|(b, s)| (total - s) / (n - (b.end - b.start)) as f64)
            .collect();
        let bar: Complex64 = loo.iter().sum::<Complex64>() / g as f64;
        let ss: f64 = loo.iter().map(|v| (v - bar).norm_sqr()).sum();
        libm::sqrt((g as f64 - 1.0) / g as f64 * ss)
    };
    CharfnEstimate { re: mean.re, im: mean.im, se, samples: n }
}

/// Sequential Monte Carlo estimate of `ψ_p(ξ) = E exp(i⟨ξ, V_p⟩)`.
pub fn charfn_estimate(q: usize, p: usize, xi: &[f64], samples: u64, seed: u64) -> Result<CharfnEstimate> {
    Ok(charfn_estimates(q, p, &[xi.to_vec()], samples, seed)?[0])
}

/// Sequential estimates of `ψ_p` at several frequencies from common samples.
pub fn charfn_estimates(q: usize, p: usize, xis: &[Vec<f64>], samples: u64, seed: u64) -> Result<Vec<CharfnEstimate>> {
    check_samples(samples)?;
    let blocks = charfn_blocks(samples);
    let mut conv = DirectConvolver;
    let sums = blocks
        .iter()
        .map(|b| charfn_block(q, p, xis, seed, b.clone(), &mut conv))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_blocks(&blocks, &sums, xis.len()))
}

/// Rejects sample counts below [`MIN_SAMPLES`].
pub fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::domain(alloc::format!("charfn needs at least {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

/// Splits per-block multi-frequency sums into one estimate per frequency.
pub fn combine_blocks(blocks: &[Range<u64>], sums: &[Vec<Complex64>], nfreq: usize) -> Vec<CharfnEstimate> {
    (0..nfreq)
        .map(|f| {
            let col: Vec<Complex64> = sums.iter().map(|s| s[f]).collect();
            charfn_from_blocks(blocks, &col)
        })
        .collect()
}
