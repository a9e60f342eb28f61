//! Deterministic checks of the phase function, the `þ_n` determinants,
//! the characteristic-function decay and the triple-integral convergence.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use iterint_core::fourier_tableau::{partial_sums_with, sample_tableau};
use iterint_core::integrals::integral_set;
use iterint_core::lyndon::dimension;
use iterint_core::phase_lab::{log_abs, phase_point, thorn, thorn_bareiss, thorn_pfaffian, Omega, PhasePolynomial, PFAFFIAN_MAX};
use iterint_core::rng::{channel, tag, unit_vector, NormalStream};

use crate::error::{Error, Result};
use crate::parallel::Pool;
use crate::scans::{charfn_scan, Estimate};

/// Finite-difference step of [`phase_check`].
pub const FD_STEP: f64 = 1e-4;

/// Worst discrepancies found by [`phase_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCheck {
    /// `max ‖∇Φ − ∇_h Φ‖ / ‖∇Φ‖` over the points.
    pub gradient_rel: f64,
    /// `max |∂²Φ − ∂_h ∇Φ|` over all entries and points.
    pub hessian_abs: f64,
    /// `max |Φ(v) − ⟨ω, V_p⟩| / Σ|ω_i V_i|` over the points.
    pub pairing_rel: f64,
    pub points: u64,
}

/// A random frequency vector with standard normal entries.
pub fn random_omega(q: usize, seed: u64, stream: u64) -> Result<Omega> {
    let mut v = vec![0.0; dimension(q)];
    NormalStream::new(seed, stream, channel(tag::AUX, 0), 0).fill(&mut v);
    Ok(Omega::from_flat(q, &v)?)
}

/// Central-difference checks of the gradient and Hessian of `Φ_p` and of
/// the identity `Φ_p = ⟨ω, V_p⟩` at `points` random `(ω, tableau)` pairs.
pub fn phase_check(pool: &Pool, q: usize, p: usize, points: u64, seed: u64) -> Result<PhaseCheck> {
    let per = pool.try_map(points, |conv, i| {
        let w = random_omega(q, seed, i)?;
        let t = sample_tableau(q, p, seed, i)?;
        let v = phase_point(&t);
        let poly = PhasePolynomial::new(p, &w)?;
        let shifted = |c: usize, h: f64| {
            let mut a = v.clone();
            a[c] += h;
            a
        };
        let g = poly.gradient(&v)?;
        let mut num = 0.0;
        for (c, gc) in g.iter().enumerate() {
            let fd = (poly.value(&shifted(c, FD_STEP))? - poly.value(&shifted(c, -FD_STEP))?) / (2.0 * FD_STEP);
            num += (gc - fd) * (gc - fd);
        }
        let den = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        let gradient_rel = num.sqrt() / den.max(f64::MIN_POSITIVE);
        let hs = poly.hessian(&v)?;
        let mut hessian_abs: f64 = 0.0;
        for c in 0..v.len() {
            let ga = poly.gradient(&shifted(c, FD_STEP))?;
            let gb = poly.gradient(&shifted(c, -FD_STEP))?;
            for r in 0..v.len() {
                hessian_abs = hessian_abs.max(((ga[r] - gb[r]) / (2.0 * FD_STEP) - hs[(r, c)]).abs());
            }
        }
        let flat = partial_sums_with(&t, conv).flatten();
        let wf = w.flatten();
        let pairing: f64 = flat.iter().zip(&wf).map(|(a, b)| a * b).sum();
        let scale: f64 = flat.iter().zip(&wf).map(|(a, b)| (a * b).abs()).sum();
        let pairing_rel = (poly.value(&v)? - pairing).abs() / scale.max(f64::MIN_POSITIVE);
        Ok((gradient_rel, hessian_abs, pairing_rel))
    })?;
    let max = |f: fn(&(f64, f64, f64)) -> f64| per.iter().map(f).fold(0.0, f64::max);
    Ok(PhaseCheck { gradient_rel: max(|r| r.0), hessian_abs: max(|r| r.1), pairing_rel: max(|r| r.2), points })
}

/// One line of the `þ_n` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThornRow {
    pub n: usize,
    /// Exact value as `numerator/denominator`.
    pub exact: String,
    pub approx: f64,
    /// `ln |þ_n|`, or `None` when `þ_n = 0`.
    pub log_abs: Option<f64>,
    /// Whether the second exact method agreed (`None` if not run).
    pub cross_checked: Option<bool>,
}

/// `þ_1, …, þ_{n_max}`; values with `n <= cross_check_max` are also
/// computed by fraction-free elimination and compared.
pub fn thorn_table(pool: &Pool, n_max: usize, cross_check_max: usize) -> Result<Vec<ThornRow>> {
    if n_max == 0 {
        return Err(Error::Usage("n-max must be at least 1".into()));
    }
    pool.try_map(n_max as u64, |_, i| {
        let n = i as usize + 1;
        let v: BigRational = thorn(n)?;
        let cross_checked = if n <= cross_check_max && n % 2 == 0 {
            let other = if n <= PFAFFIAN_MAX { thorn_bareiss(n)? } else { thorn_pfaffian(n)? };
            Some(other == v)
        } else {
            None
        };
        Ok(ThornRow {
            n,
            exact: if v.is_integer() { v.numer().to_string() } else { format!("{}/{}", v.numer(), v.denom()) },
            approx: iterint_core::phase_lab::approx_f64(&v),
            log_abs: if v.is_zero() { None } else { Some(log_abs(&v)) },
            cross_checked,
        })
    })
}

/// Whether `n` is prime.
pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// `|ψ_p|` at two radii along one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProbe {
    pub direction: u64,
    pub radii: Vec<f64>,
    pub modulus: Vec<f64>,
    pub se: Vec<f64>,
}

/// `|ψ_p(r θ_k)|` for unit directions `θ_k` drawn from `dir_seed`, with all
/// radii and directions evaluated on the same samples.
#[allow(clippy::too_many_arguments)]
pub fn charfn_probe(
    pool: &Pool,
    q: usize,
    p: usize,
    samples: u64,
    seed: u64,
    dir_seed: u64,
    directions: u64,
    radii: &[f64],
) -> Result<Vec<DecayProbe>> {
    if radii.is_empty() || directions == 0 {
        return Err(Error::Usage("need at least one radius and one direction".into()));
    }
    let d = dimension(q);
    let dirs: Vec<Vec<f64>> = (0..directions).map(|k| unit_vector(dir_seed, k, channel(tag::DIRECTION, 0), d)).collect();
    let xis: Vec<Vec<f64>> = dirs.iter().flat_map(|u| radii.iter().map(move |&r| u.iter().map(|a| a * r).collect())).collect();
    let est = charfn_scan(pool, q, p, &xis, samples, seed)?;
    Ok((0..directions as usize)
        .map(|k| {
            let e = &est[k * radii.len()..(k + 1) * radii.len()];
            DecayProbe {
                direction: k as u64,
                radii: radii.to_vec(),
                modulus: e.iter().map(|x| x.modulus()).collect(),
                se: e.iter().map(|x| x.se).collect(),
            }
        })
        .collect())
}

/// `E Σ_{jkl} (I_{jkl}(p) − I_{jkl}(p_ref))²` over a grid of `p`, where both
/// triple integrals are computed from prefixes of the same tableau.
pub fn triple_discrepancy_scan(
    pool: &Pool,
    q: usize,
    p_grid: &[usize],
    p_ref: usize,
    paths: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if p_grid.iter().any(|&p| p == 0 || p >= p_ref) {
        return Err(Error::Usage("grid values must lie in [1, p_ref)".into()));
    }
    let per = pool.try_map(paths, |conv, i| {
        let t = sample_tableau(q, p_ref, seed, i)?;
        let full = integral_set(&t, conv);
        p_grid
            .iter()
            .map(|&p| {
                let s = integral_set(&t.truncate(p)?, conv);
                Ok(s.i3.iter().zip(&full.i3).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok((0..p_grid.len()).map(|g| crate::scans::mean_se(&per.iter().map(|r| r[g]).collect::<Vec<_>>())).collect())
}
