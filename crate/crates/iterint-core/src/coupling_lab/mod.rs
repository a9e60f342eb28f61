//! Candidates `V̄_p` for the unresolved tail of `V`, empirical
//! Wasserstein-2 distances, and power-law rate fits.
//!
//! A candidate is added to the retained sums `V_p` so that `V_p + V̄_p`
//! approximates the law of `V`. Two generators are provided:
//!
//! * independent tail: the tail `V_N − V_p` of a fresh tableau that shares
//!   nothing with the retained coefficients. It has the exact unconditional
//!   law of the tail, and its conditional mean given `v_p` is the
//!   deterministic tail mean.
//! * Gaussian matched: the conditional mean of the tail plus `L g` where
//!   `L Lᵀ` is the conditional covariance given `v_p` and `g` is standard
//!   normal, matching the conditional law through second moments.

mod rate;
mod transport;

pub use rate::{fit_slope, RateMetadata, RateReport};
pub use transport::{
    min_cost_assignment, projection_direction, sliced_from_terms, sliced_term, sliced_w2, w2_squared_1d,
    wasserstein2_exact, SlicedEstimate, EXACT_MAX_SAMPLES, MIN_PROJECTIONS,
};

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_tableau::{
    conditional_tail_mean_truncated, partial_sums_with, sample_tableau, tail_of_extended, Convolver, Tableau,
    TailCovarianceTables,
};
use crate::rng::{channel, derive_stream, tag, NormalStream};

/// Label mixed into the stream of the fresh tableau behind an independent tail.
pub const INDEPENDENT_TAIL_LABEL: u64 = 0x7461_696c;

/// Generator family for `V̄_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    IndependentTail,
    GaussianMatched,
}

/// A candidate generator with tail truncation `N = n_multiplier · p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSpec {
    pub kind: CandidateKind,
    pub n_multiplier: usize,
}

impl CandidateSpec {
    /// Validated constructor; `n_multiplier >= 2`.
    pub fn new(kind: CandidateKind, n_multiplier: usize) -> Result<Self> {
        if n_multiplier < 2 {
            return Err(Error::domain("candidate tail multiplier must be >= 2"));
        }
        Ok(CandidateSpec { kind, n_multiplier })
    }

    /// Conditional matching order `m`: 2 for the independent tail, 3 for the
    /// Gaussian-matched candidate.
    pub fn order(&self) -> usize {
        match self.kind {
            CandidateKind::IndependentTail => 2,
            CandidateKind::GaussianMatched => 3,
        }
    }
}

/// A candidate draw and whether the covariance factor needed eigenvalue clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub values: Vec<f64>,
    pub clipped: bool,
}

/// Draws candidates for tableaus with a fixed `(q, p)`.
#[derive(Debug, Clone)]
pub struct CandidateSampler {
    pub q: usize,
    pub p: usize,
    pub spec: CandidateSpec,
    tables: Option<TailCovarianceTables>,
}

impl CandidateSampler {
    /// Precomputes the covariance tables needed by the Gaussian-matched kind.
    pub fn new(q: usize, p: usize, spec: CandidateSpec) -> Result<Self> {
        CandidateSpec::new(spec.kind, spec.n_multiplier)?;
        if p == 0 {
            return Err(Error::domain("candidates need p >= 1"));
        }
        let tables = match spec.kind {
            CandidateKind::IndependentTail => None,
            CandidateKind::GaussianMatched => Some(TailCovarianceTables::new(q, p, p * spec.n_multiplier)?),
        };
        Ok(CandidateSampler { q, p, spec, tables })
    }

    /// Tail truncation `N`.
    pub fn n(&self) -> usize {
        self.p * self.spec.n_multiplier
    }

    /// Draws `V̄_p` for the retained tableau `t`. The randomness is keyed by
    /// `(seed, stream)` and is independent of `t`'s own coefficients whenever
    /// `(seed, stream)` differs from the pair that generated `t`.
    pub fn sample<C: Convolver + ?Sized>(&self, t: &Tableau, seed: u64, stream: u64, conv: &mut C) -> Result<Candidate> {
        if t.q != self.q || t.p != self.p {
            return Err(Error::contract("tableau shape differs from the candidate sampler"));
        }
        match self.spec.kind {
            CandidateKind::IndependentTail => {
                let fresh = sample_tableau(self.q, self.n(), seed, derive_stream(stream, INDEPENDENT_TAIL_LABEL))?;
                let tail = tail_of_extended(&fresh, self.p, conv)?;
                Ok(Candidate { values: tail.sums.flatten(), clipped: false })
            }
            CandidateKind::GaussianMatched => Ok(self.gaussian_parts(t)?.draw(seed, stream)),
        }
    }

    /// Conditional mean and covariance factor of the tail given `t`.
    pub fn gaussian_parts(&self, t: &Tableau) -> Result<GaussianParts> {
        let tables = match &self.tables {
            Some(tb) => tb.clone(),
            None => TailCovarianceTables::new(self.q, self.p, self.n())?,
        };
        if t.q != self.q || t.p != self.p {
            return Err(Error::contract("tableau shape differs from the candidate sampler"));
        }
        let mean = conditional_tail_mean_truncated(t, self.n())?;
        let cov = tables.covariance(t)?;
        let (factor, clipped) = covariance_factor(mean.len(), &cov)?;
        Ok(GaussianParts { mean, factor, clipped })
    }
}

/// Conditional mean and a covariance factor for one retained tableau.
#[derive(Debug, Clone)]
pub struct GaussianParts {
    pub mean: Vec<f64>,
    pub factor: DMatrix<f64>,
    pub clipped: bool,
}

impl GaussianParts {
    /// `mean + L g` with `g` drawn from the auxiliary channel of `(seed, stream)`.
    pub fn draw(&self, seed: u64, stream: u64) -> Candidate {
        let d = self.mean.len();
        let mut g = vec![0.0; d];
        NormalStream::new(seed, stream, channel(tag::AUX, 0), 0).fill(&mut g);
        let noise = &self.factor * nalgebra::DVector::from_vec(g);
        Candidate { values: self.mean.iter().zip(noise.iter()).map(|(m, e)| m + e).collect(), clipped: self.clipped }
    }
}

/// A factor `L` with `L Lᵀ = Σ`: Cholesky when it succeeds, otherwise the
/// symmetric eigendecomposition with negative eigenvalues clipped to zero.
pub fn covariance_factor(d: usize, cov: &[f64]) -> Result<(DMatrix<f64>, bool)> {
    if cov.len() != d * d {
        return Err(Error::contract("covariance has the wrong size"));
    }
    let m = DMatrix::from_row_slice(d, d, cov);
    let sym = (&m + m.transpose()) * 0.5;
    if let Some(ch) = sym.clone().cholesky() {
        return Ok((ch.l(), false));
    }
    let eig = SymmetricEigen::new(sym);
    let mut v = eig.eigenvectors;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = libm::sqrt(lam.max(0.0));
        v.column_mut(k).scale_mut(s);
    }
    Ok((v, true))
}

/// One draw of `V_p + V̄_p` for path index `path`: the retained tableau uses
/// `(seed, path)` and the candidate a stream derived from it.
pub fn coupled_sample<C: Convolver + ?Sized>(
    sampler: &CandidateSampler,
    seed: u64,
    path: u64,
    conv: &mut C,
) -> Result<Candidate> {
    let t = sample_tableau(sampler.q, sampler.p, seed, path)?;
    let head = partial_sums_with(&t, conv).flatten();
    let cand = sampler.sample(&t, seed, derive_stream(path, 1), conv)?;
    Ok(Candidate { values: head.iter().zip(&cand.values).map(|(a, b)| a + b).collect(), clipped: cand.clipped })
}

/// `|x|^m` for the Euclidean norm.
pub fn norm_power(x: &[f64], m: u32) -> f64 {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    match m {
        2 => n2,
        4 => n2 * n2,
        _ => libm::pow(libm::sqrt(n2), m as f64),
    }
}
