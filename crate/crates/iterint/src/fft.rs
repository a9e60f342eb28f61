//! A [`Convolver`] backed by `rustfft`.
//!
//! Convolutions are evaluated with zero-padded power-of-two transforms of
//! length at least `2·len`, so circular wrap-around never reaches the
//! retained outputs. The Toeplitz and Hankel kernels of the `ν` product
//! depend only on `n`; their spectra are cached per length.

use std::collections::HashMap;
use std::sync::Arc;

use iterint_core::fourier_tableau::Convolver;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Below this length the direct `O(n²)` sums are faster than transforms.
pub const DIRECT_CUTOFF: usize = 24;

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// FFT convolution backend with cached plans and kernel spectra.
pub struct FftConvolver {
    planner: FftPlanner<f64>,
    plans: HashMap<usize, Plan>,
    kernels: HashMap<usize, (Vec<Complex64>, Vec<Complex64>)>,
    scratch: Vec<Complex64>,
}

impl Default for FftConvolver {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for FftConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftConvolver").field("cached_lengths", &self.plans.len()).finish()
    }
}

impl FftConvolver {
    pub fn new() -> Self {
        FftConvolver { planner: FftPlanner::new(), plans: HashMap::new(), kernels: HashMap::new(), scratch: Vec::new() }
    }

    fn plan(&mut self, l: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let planner = &mut self.planner;
        let p = self
            .plans
            .entry(l)
            .or_insert_with(|| Plan { forward: planner.plan_fft_forward(l), inverse: planner.plan_fft_inverse(l) });
        (p.forward.clone(), p.inverse.clone())
    }

    fn transform(&mut self, fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        let need = fft.get_inplace_scratch_len();
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        fft.process_with_scratch(buf, &mut self.scratch[..need]);
    }

    fn padded(&mut self, fwd: &Arc<dyn Fft<f64>>, src: &[Complex64], take: usize, l: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        let m = src.len().min(take);
        buf[..m].copy_from_slice(&src[..m]);
        self.transform(fwd, &mut buf);
        buf
    }

    fn kernel_spectra(&mut self, n: usize, l: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        if let Some(k) = self.kernels.get(&n) {
            return k.clone();
        }
        let (fwd, _) = self.plan(l);
        let zero = Complex64::new(0.0, 0.0);
        let mut toeplitz = vec![zero; l];
        for m in 1..n {
            toeplitz[m] = Complex64::new(1.0 / m as f64, 0.0);
            toeplitz[l - m] = Complex64::new(-1.0 / m as f64, 0.0);
        }
        let mut hankel = vec![zero; l];
        for (m, v) in hankel.iter_mut().enumerate().take(2 * n - 1) {
            *v = Complex64::new(1.0 / (m + 2) as f64, 0.0);
        }
        self.transform(&fwd, &mut toeplitz);
        self.transform(&fwd, &mut hankel);
        self.kernels.insert(n, (toeplitz.clone(), hankel.clone()));
        (toeplitz, hankel)
    }
}

impl Convolver for FftConvolver {
    fn convolve_pairs(&mut self, seqs: &[&[Complex64]], pairs: &[(usize, usize)], len: usize) -> Vec<Vec<Complex64>> {
        if len == 0 {
            return vec![Vec::new(); pairs.len()];
        }
        if len <= DIRECT_CUTOFF {
            return iterint_core::fourier_tableau::DirectConvolver.convolve_pairs(seqs, pairs, len);
        }
        let l = (2 * len).next_power_of_two();
        let (fwd, inv) = self.plan(l);
        let mut spectra: HashMap<usize, Vec<Complex64>> = HashMap::new();
        for &(a, b) in pairs {
            for i in [a, b] {
                if let std::collections::hash_map::Entry::Vacant(e) = spectra.entry(i) {
                    e.insert(self.padded(&fwd, seqs[i], len, l));
                }
            }
        }
        let scale = 1.0 / l as f64;
        pairs
            .iter()
            .map(|&(a, b)| {
                let (sa, sb) = (&spectra[&a], &spectra[&b]);
                let mut prod: Vec<Complex64> = sa.iter().zip(sb).map(|(x, y)| x * y).collect();
                self.transform(&inv, &mut prod);
                prod.truncate(len);
                prod.iter_mut().for_each(|v| *v *= scale);
                prod
            })
            .collect()
    }

    fn toeplitz_hankel(&mut self, a: &[Complex64]) -> Vec<Complex64> {
        let n = a.len();
        if n <= DIRECT_CUTOFF {
            return iterint_core::fourier_tableau::DirectConvolver.toeplitz_hankel(a);
        }
        let l = (2 * n).next_power_of_two();
        let (fwd, inv) = self.plan(l);
        let (kt, kh) = self.kernel_spectra(n, l);
        let fa = self.padded(&fwd, a, n, l);
        let rev: Vec<Complex64> = a.iter().rev().copied().collect();
        let fb = self.padded(&fwd, &rev, n, l);
        let mut t: Vec<Complex64> = fa.iter().zip(&kt).map(|(x, y)| x * y).collect();
        let mut h: Vec<Complex64> = fb.iter().zip(&kh).map(|(x, y)| x * y).collect();
        self.transform(&inv, &mut t);
        self.transform(&inv, &mut h);
        let scale = 1.0 / l as f64;
        (0..n).map(|j| (t[j] + h[j + n - 1]) * scale).collect()
    }
}
