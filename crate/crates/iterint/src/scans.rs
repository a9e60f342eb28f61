//! Parallel Monte Carlo experiments built on the core modules.

use serde::{Deserialize, Serialize};

use iterint_core::coupling_lab::{
    coupled_sample, norm_power, sliced_from_terms, sliced_term, wasserstein2_exact, CandidateKind, CandidateSampler,
    CandidateSpec, RateMetadata, RateReport, SlicedEstimate, EXACT_MAX_SAMPLES, MIN_PROJECTIONS,
};
use iterint_core::fourier_tableau::{partial_sums_with, sample_tableau, tail_of_extended, zeta2_tail};
use iterint_core::integrals::integral_set;
use iterint_core::lyndon::IndexLayout;
use iterint_core::phase_lab::{charfn_block, charfn_blocks, check_samples, combine_blocks, CharfnEstimate};
use iterint_core::rng::derive_stream;
use iterint_core::sde_schemes::{path_squared_errors, strong_error_report, ScanConfig, SdeProblem};

use crate::error::{Error, Result};
use crate::parallel::Pool;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// Sample mean and standard error, summed in index order.
pub fn mean_se(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 { xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Estimate { value: m, se: (v / n).sqrt() }
}

/// Worst relative residuals of the exact finite-`p` identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `max |ν_jk + ν_kj − (z_j z_k − μ1_jk)| / (1 + |z_j z_k − μ1_jk|)`.
    pub nu: f64,
    /// `max |I_jk + I_kj − W^j W^k| / (1 + |W^j W^k|)`.
    pub shuffle: f64,
    pub paths: u64,
}

/// Checks the `ν` reversal identity and the level-2 shuffle identity on
/// `paths` tableaus. `ν_kj` is evaluated by the convolution kernel directly.
pub fn identities_scan(pool: &Pool, q: usize, p: usize, paths: u64, seed: u64) -> Result<IdentityResiduals> {
    let per = pool.try_map(paths, |conv, i| {
        let t = sample_tableau(q, p, seed, i)?;
        let s = partial_sums_with(&t, conv);
        let set = integral_set(&t, conv);
        let (mut rn, mut rs) = (0.0f64, 0.0f64);
        for j in 0..q {
            for k in 0..q {
                if j != k {
                    let target = s.z[j] * s.z[k] - s.mu1_full(j, k);
                    let sum = iterint_core::fourier_tableau::nu_pair(&t, j, k, conv)
                        + iterint_core::fourier_tableau::nu_pair(&t, k, j, conv);
                    rn = rn.max((sum - target).abs() / (1.0 + target.abs()));
                }
                let prod = t.w1[j] * t.w1[k];
                rs = rs.max((set.i2_at(j, k) + set.i2_at(k, j) - prod).abs() / (1.0 + prod.abs()));
            }
        }
        Ok((rn, rs))
    })?;
    let nu = per.iter().map(|r| r.0).fold(0.0, f64::max);
    let shuffle = per.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(IdentityResiduals { nu, shuffle, paths })
}

/// Parameters of [`tail_moment_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailScanConfig {
    pub q: usize,
    pub orders: Vec<u32>,
    pub p_grid: Vec<usize>,
    pub n_multiplier: usize,
    pub paths: u64,
    pub seed: u64,
}

/// Output of [`tail_moment_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailScan {
    /// One report per requested order `m`, estimating `E|Ṽ_{p,Np}|^m`.
    pub reports: Vec<RateReport>,
    /// `E[λ̃_12²]` per grid point.
    pub lambda_second_moment: Vec<Estimate>,
    /// The series `2 Σ_{p<r<=Np} r^{-2}` per grid point.
    pub lambda_analytic: Vec<f64>,
}

/// Moments of the tail `Ṽ_{p,Np}` over a grid of `p`.
///
/// Each path draws one tableau with `N_max = n_multiplier · max p` modes;
/// grid point `p` uses its prefix of `n_multiplier · p` modes.
pub fn tail_moment_scan(pool: &Pool, cfg: &TailScanConfig) -> Result<TailScan> {
    let mut grid = cfg.p_grid.clone();
    grid.sort_unstable();
    if grid.len() < 4 || grid.windows(2).any(|w| w[0] == w[1]) || grid[0] == 0 {
        return Err(Error::Usage("the p grid needs at least 4 distinct positive values".into()));
    }
    if cfg.n_multiplier < 2 || cfg.orders.is_empty() || cfg.paths < 2 {
        return Err(Error::Usage("tail scans need n_multiplier >= 2, an order and at least 2 paths".into()));
    }
    let q = cfg.q;
    let layout = IndexLayout::new(q)?;
    let nmax = cfg.n_multiplier * grid[grid.len() - 1];
    let per = pool.try_map(cfg.paths, |conv, i| {
        let t = sample_tableau(q, nmax, cfg.seed, i)?;
        grid.iter()
            .map(|&p| {
                let tail = tail_of_extended(&t.truncate(cfg.n_multiplier * p)?, p, conv)?;
                let flat = tail.sums.flatten();
                let lam = if q >= 2 { flat[layout.lambda] } else { 0.0 };
                let mut row: Vec<f64> = cfg.orders.iter().map(|&m| norm_power(&flat, m)).collect();
                row.push(lam * lam);
                Ok(row)
            })
            .collect::<Result<Vec<Vec<f64>>>>()
    })?;
    let gridf: Vec<f64> = grid.iter().map(|&p| p as f64).collect();
    let mut reports = Vec::new();
    for (oi, &m) in cfg.orders.iter().enumerate() {
        let est: Vec<Estimate> = (0..grid.len())
            .map(|g| mean_se(&per.iter().map(|row| row[g][oi]).collect::<Vec<_>>()))
            .collect();
        let meta = RateMetadata {
            estimator: format!("tail-moment/m={m}"),
            seed: cfg.seed,
            samples: cfg.paths,
            notes: vec![format!("q={q}"), format!("n_multiplier={}", cfg.n_multiplier)],
        };
        reports.push(RateReport::new(
            gridf.clone(),
            est.iter().map(|e| e.value).collect(),
            est.iter().map(|e| e.se).collect(),
            meta,
        )?);
    }
    let li = cfg.orders.len();
    let lambda_second_moment =
        (0..grid.len()).map(|g| mean_se(&per.iter().map(|row| row[g][li]).collect::<Vec<_>>())).collect();
    let lambda_analytic = grid.iter().map(|&p| 2.0 * zeta2_tail(p, Some(cfg.n_multiplier * p))).collect();
    Ok(TailScan { reports, lambda_second_moment, lambda_analytic })
}

/// Distance estimator used by [`coupling_rate_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Estimator {
    Exact,
    Sliced { projections: usize },
}

/// How reference and candidate samples relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Candidate `i` keeps the first `p` modes of reference tableau `i`
    /// and draws only its tail afresh (common random numbers).
    SharedHead,
    /// Reference and candidate samples are independent.
    Independent,
}

/// Parameters of [`coupling_rate_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub q: usize,
    pub p_grid: Vec<usize>,
    pub kind: CandidateKind,
    pub p_ref: usize,
    pub samples: u64,
    pub estimator: Estimator,
    pub pairing: Pairing,
    pub seed: u64,
}

/// Output of [`coupling_rate_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingScan {
    pub report: RateReport,
    /// Candidates whose covariance factor needed eigenvalue clipping.
    pub clipped: u64,
}

/// Stream label of the reference sample.
pub const REFERENCE_LABEL: u64 = 0x7265_6600;

/// Samples of `V` at truncation `p_ref`; sample `i` uses tableau
/// `(seed', i)` where `seed' = seed` for shared heads and a derived seed
/// otherwise.
pub fn reference_sample(
    pool: &Pool,
    q: usize,
    p_ref: usize,
    samples: u64,
    seed: u64,
    pairing: Pairing,
) -> Result<Vec<Vec<f64>>> {
    let rs = match pairing {
        Pairing::SharedHead => seed,
        Pairing::Independent => derive_stream(seed, REFERENCE_LABEL),
    };
    pool.try_map(samples, |conv, i| Ok(partial_sums_with(&sample_tableau(q, p_ref, rs, i)?, conv).flatten()))
}

/// Samples of `V_p + V̄_p` with candidate tails truncated at `p_ref`.
#[allow(clippy::too_many_arguments)]
pub fn candidate_sample(
    pool: &Pool,
    q: usize,
    p: usize,
    kind: CandidateKind,
    p_ref: usize,
    samples: u64,
    seed: u64,
    pairing: Pairing,
) -> Result<(Vec<Vec<f64>>, u64)> {
    if p_ref % p != 0 {
        return Err(Error::Usage(format!("p_ref = {p_ref} must be a multiple of p = {p}")));
    }
    let sampler = CandidateSampler::new(q, p, CandidateSpec::new(kind, p_ref / p)?)?;
    let ps = match pairing {
        Pairing::SharedHead => seed,
        Pairing::Independent => derive_stream(seed, p as u64),
    };
    let draws = pool.try_map(samples, |conv, i| Ok(coupled_sample(&sampler, ps, i, conv)?))?;
    let clipped = draws.iter().filter(|c| c.clipped).count() as u64;
    Ok((draws.into_iter().map(|c| c.values).collect(), clipped))
}

/// Distance between two samples with the chosen estimator.
pub fn distance(pool: &Pool, a: &[Vec<f64>], b: &[Vec<f64>], estimator: Estimator, seed: u64) -> Result<SlicedEstimate> {
    match estimator {
        Estimator::Exact => {
            let w = wasserstein2_exact(a, b)?;
            Ok(SlicedEstimate { value: w, se: 0.0, mean_square: w * w, projections: 0 })
        }
        Estimator::Sliced { projections } => {
            if projections < MIN_PROJECTIONS {
                return Err(Error::Usage(format!("at least {MIN_PROJECTIONS} projections are required")));
            }
            if a.len() != b.len() || a.is_empty() {
                return Err(Error::Usage("samples must be non-empty and of equal size".into()));
            }
            let terms = pool.map(projections as u64, |_, k| sliced_term(a, b, seed, k as usize));
            Ok(sliced_from_terms(&terms))
        }
    }
}

/// Distances between `V` (at `p_ref`) and `V_p + V̄_p` over a grid of `p`,
/// with the fitted slope in `log p`.
pub fn coupling_rate_scan(pool: &Pool, cfg: &CouplingConfig) -> Result<CouplingScan> {
    let mut grid = cfg.p_grid.clone();
    grid.sort_unstable();
    if grid.len() < 4 || grid.windows(2).any(|w| w[0] == w[1]) || grid[0] == 0 {
        return Err(Error::Usage("the p grid needs at least 4 distinct positive values".into()));
    }
    if cfg.p_ref < 8 * grid[grid.len() - 1] {
        return Err(Error::Core(iterint_core::Error::Domain(format!(
            "p_ref = {} is below 8 x max grid = {}",
            cfg.p_ref,
            8 * grid[grid.len() - 1]
        ))));
    }
    if cfg.estimator == Estimator::Exact && cfg.samples as usize > EXACT_MAX_SAMPLES {
        return Err(Error::Usage(format!("the exact estimator is limited to {EXACT_MAX_SAMPLES} samples")));
    }
    let reference = reference_sample(pool, cfg.q, cfg.p_ref, cfg.samples, cfg.seed, cfg.pairing)?;
    let mut values = Vec::new();
    let mut stderr = Vec::new();
    let mut clipped = 0;
    for &p in &grid {
        let (cand, c) = candidate_sample(pool, cfg.q, p, cfg.kind, cfg.p_ref, cfg.samples, cfg.seed, cfg.pairing)?;
        clipped += c;
        let d = distance(pool, &reference, &cand, cfg.estimator, derive_stream(cfg.seed, 0x70726f6a))?;
        values.push(d.value);
        stderr.push(d.se);
    }
    let estimator = match cfg.estimator {
        Estimator::Exact => "w2-exact".to_string(),
        Estimator::Sliced { projections } => format!("w2-sliced/{projections}"),
    };
    let kind = match cfg.kind {
        CandidateKind::IndependentTail => "independent-tail",
        CandidateKind::GaussianMatched => "gaussian-matched",
    };
    let meta = RateMetadata {
        estimator,
        seed: cfg.seed,
        samples: cfg.samples,
        notes: vec![
            format!("q={}", cfg.q),
            format!("kind={kind}"),
            format!("p_ref={}", cfg.p_ref),
            format!("candidate_tail_end={}", cfg.p_ref),
            format!("clipped={clipped}"),
            format!(
                "pairing={}",
                match cfg.pairing {
                    Pairing::SharedHead => "shared-head",
                    Pairing::Independent => "independent",
                }
            ),
        ],
    };
    let report = RateReport::new(grid.iter().map(|&p| p as f64).collect(), values, stderr, meta)?;
    Ok(CouplingScan { report, clipped })
}

/// Strong-error scan with paths distributed over the pool.
pub fn strong_error_scan<P: SdeProblem + ?Sized>(pool: &Pool, problem: &P, cfg: &ScanConfig) -> Result<RateReport> {
    if cfg.h_grid.len() < 4 {
        return Err(Error::Usage("the step grid needs at least 4 values".into()));
    }
    if cfg.x0.len() != problem.dim() {
        return Err(Error::Usage(format!("x0 must have {} components", problem.dim())));
    }
    let per = pool.try_map(cfg.paths, |conv, path| Ok(path_squared_errors(problem, cfg, path, conv)?))?;
    Ok(strong_error_report(cfg, problem.name(), &per)?)
}

/// Parallel `ψ_p` estimates at several frequencies from common samples.
pub fn charfn_scan(pool: &Pool, q: usize, p: usize, xis: &[Vec<f64>], samples: u64, seed: u64) -> Result<Vec<CharfnEstimate>> {
    check_samples(samples)?;
    let blocks = charfn_blocks(samples);
    let sums = pool.try_map(blocks.len() as u64, |conv, b| {
        Ok(charfn_block(q, p, xis, seed, blocks[b as usize].clone(), conv)?)
    })?;
    Ok(combine_blocks(&blocks, &sums, xis.len()))
}
