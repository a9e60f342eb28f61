use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::{integrate, SchemeKind, SdeProblem};
use crate::coupling_lab::{RateMetadata, RateReport};
use crate::error::{Error, Result};
use crate::fourier_tableau::{sample_tableau, zeta2_tail, Convolver};
use crate::integrals::{chen_concat, integral_set, scale_to_interval, stratonovich_to_ito, IntegralSet};
use crate::rng::{channel, derive_stream, tag, NormalStream};

/// Fourier modes per fine step used by default.
pub const DEFAULT_DRIVER_MODES: usize = 16;

/// Halvings between the smallest scanned step and the reference step.
pub const DEFAULT_REFINEMENT_LEVELS: u32 = 6;

/// Generates per-step Stratonovich signatures from Fourier tableaus.
///
/// Step `k` of path `path` uses the tableau keyed by
/// `(seed, derive_stream(path, k))`. With `complete_tail` set, the time
/// integrals `∫ W ds` and `∫ s dW` receive the Gaussian contribution of the
/// discarded modes, which makes them exact in law jointly with `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierDriver {
    pub q: usize,
    pub p: usize,
    pub seed: u64,
    pub complete_tail: bool,
}

impl FourierDriver {
    /// The unit-interval signature of step `k` along path `path`.
    pub fn unit_set<C: Convolver + ?Sized>(&self, path: u64, k: u64, conv: &mut C) -> Result<IntegralSet> {
        let stream = derive_stream(path, k);
        let t = sample_tableau(self.q, self.p, self.seed, stream)?;
        let mut set = integral_set(&t, conv);
        if self.complete_tail {
            let sd = libm::sqrt(zeta2_tail(self.p, None));
            let mut g = vec![0.0; self.q];
            NormalStream::new(self.seed, stream, channel(tag::AUX, 0), 0).fill(&mut g);
            g.iter_mut().for_each(|v| *v *= sd);
            complete_mixed_integrals(&mut set, &g);
        }
        Ok(set)
    }

    /// `n` consecutive Stratonovich step signatures of length `h`.
    pub fn fine_sets<C: Convolver + ?Sized>(&self, path: u64, n: usize, h: f64, conv: &mut C) -> Result<Vec<IntegralSet>> {
        (0..n as u64).map(|k| scale_to_interval(&self.unit_set(path, k, conv)?, h)).collect()
    }
}

/// Adds the contribution `z_tail` of unresolved modes to the time integrals
/// of a unit-interval signature: `∫ W ds` shifts by `−z_tail/(√2 π)` and
/// `∫ s dW = W_1 − ∫ W ds`.
pub fn complete_mixed_integrals(set: &mut IntegralSet, z_tail: &[f64]) {
    for j in 0..set.q {
        set.int_w_dt[j] -= z_tail[j] / (SQRT_2 * PI);
        set.int_t_dw[j] = set.dw[j] * set.h - set.int_w_dt[j];
    }
}

/// Chen-combines consecutive groups of `factor` signatures.
pub fn coarsen(sets: &[IntegralSet], factor: usize) -> Result<Vec<IntegralSet>> {
    if factor == 0 || sets.len() % factor != 0 {
        return Err(Error::domain("coarsening factor must divide the number of steps"));
    }
    sets.chunks(factor)
        .map(|c| c[1..].iter().try_fold(c[0].clone(), |acc, s| chen_concat(&acc, s)))
        .collect()
}

/// How the reference trajectory of a strong-error scan is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Reference {
    /// Closed-form solution evaluated on the finest scanned grid.
    Exact,
    /// The same scheme on steps `2^levels` times finer than the smallest
    /// scanned step, driven by the fine signatures themselves.
    Refined { levels: u32 },
}

/// Parameters of a strong-error scan over `[0, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub scheme: SchemeKind,
    /// Step sizes; each must be an integer multiple of the finest step.
    pub h_grid: Vec<f64>,
    pub paths: u64,
    pub seed: u64,
    pub t_end: f64,
    pub x0: Vec<f64>,
    pub driver_modes: usize,
    pub reference: Reference,
}

impl ScanConfig {
    /// The step grid sorted increasingly.
    pub fn sorted_grid(&self) -> Vec<f64> {
        let mut g = self.h_grid.clone();
        g.sort_by(f64::total_cmp);
        g
    }

    /// Finest driving step length.
    pub fn fine_h(&self) -> Result<f64> {
        let g = self.sorted_grid();
        let hmin = *g.first().ok_or_else(|| Error::domain("empty step grid"))?;
        Ok(match self.reference {
            Reference::Exact => hmin,
            Reference::Refined { levels } => hmin / (1u64 << levels) as f64,
        })
    }

    fn ratios(&self) -> Result<(usize, Vec<usize>)> {
        let hf = self.fine_h()?;
        let n = super::step_count(self.t_end, hf)?;
        let mut out = Vec::new();
        for h in self.sorted_grid() {
            let r = libm::round(h / hf);
            if r < 1.0 || libm::fabs(r * hf - h) > 1e-9 * h {
                return Err(Error::domain(format!("step {h} is not a multiple of the fine step {hf}")));
            }
            let r = r as usize;
            if n % r != 0 {
                return Err(Error::domain(format!("step {h} does not divide the horizon")));
            }
            out.push(r);
        }
        Ok((n, out))
    }
}

/// For one path: `max_k |X_ref(t_k) − X_h(t_k)|²` for every `h` of the sorted grid.
pub fn path_squared_errors<P: SdeProblem + ?Sized, C: Convolver + ?Sized>(
    problem: &P,
    cfg: &ScanConfig,
    path: u64,
    conv: &mut C,
) -> Result<Vec<f64>> {
    let (n, ratios) = cfg.ratios()?;
    let hf = cfg.fine_h()?;
    let q = problem.noise_dim();
    let driver = FourierDriver { q, p: cfg.driver_modes, seed: cfg.seed, complete_tail: true };
    let fine = driver.fine_sets(path, n, hf, conv)?;
    let to_ito = |sets: &[IntegralSet]| sets.iter().map(stratonovich_to_ito).collect::<Result<Vec<_>>>();

    let reference: Vec<Vec<f64>> = match cfg.reference {
        Reference::Exact => {
            let mut w = vec![0.0; q];
            let mut out = Vec::with_capacity(n + 1);
            out.push(cfg.x0.clone());
            for (k, s) in fine.iter().enumerate() {
                w.iter_mut().zip(&s.dw).for_each(|(a, b)| *a += b);
                let t = (k + 1) as f64 * hf;
                out.push(problem.exact_solution(&cfg.x0, t, &w).ok_or_else(|| {
                    Error::domain(format!("problem `{}` has no closed-form solution", problem.name()))
                })?);
            }
            out
        }
        Reference::Refined { .. } => integrate(problem, cfg.scheme, &cfg.x0, &to_ito(&fine)?),
    };

    let mut errs = Vec::with_capacity(ratios.len());
    for &r in &ratios {
        let coarse = to_ito(&coarsen(&fine, r)?)?;
        let states = integrate(problem, cfg.scheme, &cfg.x0, &coarse);
        let worst = states
            .iter()
            .enumerate()
            .map(|(k, x)| x.iter().zip(&reference[k * r]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .fold(0.0, f64::max);
        errs.push(worst);
    }
    Ok(errs)
}

/// Root-mean-square maximal errors per grid point with delta-method
/// standard errors and the fitted slope.
pub fn strong_error_report(cfg: &ScanConfig, problem_name: &str, per_path: &[Vec<f64>]) -> Result<RateReport> {
    let grid = cfg.sorted_grid();
    if per_path.is_empty() {
        return Err(Error::domain("no paths"));
    }
    let npaths = per_path.len() as f64;
    let mut values = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let mean = per_path.iter().map(|e| e[g]).sum::<f64>() / npaths;
        let var = per_path.iter().map(|e| (e[g] - mean) * (e[g] - mean)).sum::<f64>() / (npaths - 1.0).max(1.0);
        let rms = libm::sqrt(mean);
        values.push(rms);
        stderr.push(if rms > 0.0 { libm::sqrt(var / npaths) / (2.0 * rms) } else { 0.0 });
    }
    let reference = match cfg.reference {
        Reference::Exact => String::from("reference=exact"),
        Reference::Refined { levels } => format!("reference=refined:{levels}"),
    };
    let meta = RateMetadata {
        estimator: format!("strong-max-rms/{}", cfg.scheme.name()),
        seed: cfg.seed,
        samples: cfg.paths,
        notes: vec![
            format!("problem={problem_name}"),
            reference,
            format!("driver_modes={}", cfg.driver_modes),
            format!("t_end={}", cfg.t_end),
        ],
    };
    RateReport::new(grid, values, stderr, meta)
}
