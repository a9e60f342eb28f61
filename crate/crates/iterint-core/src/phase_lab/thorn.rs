use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest size for which [`thorn`] uses the Pfaffian route.
pub const PFAFFIAN_MAX: usize = 24;

/// The `n×n` skew-symmetric matrix `S_n` with entry `(r, s)` equal to
/// `1/(s² − r²)` off the diagonal (one-based `r, s`).
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrixN {
    pub n: usize,
    /// Row-major exact entries.
    pub entries: Vec<BigRational>,
}

impl SkewMatrixN {
    /// Entry `(r, s)` with one-based indices.
    pub fn get(&self, r: usize, s: usize) -> &BigRational {
        &self.entries[(r - 1) * self.n + (s - 1)]
    }
}

/// Builds `S_n` exactly.
pub fn skew_matrix(n: usize) -> Result<SkewMatrixN> {
    if n == 0 {
        return Err(Error::domain("skew matrix size must be >= 1"));
    }
    let mut entries = Vec::with_capacity(n * n);
    for r in 1..=n as i64 {
        for s in 1..=n as i64 {
            entries.push(if r == s {
                BigRational::zero()
            } else {
                BigRational::new(BigInt::one(), BigInt::from(s * s - r * r))
            });
        }
    }
    Ok(SkewMatrixN { n, entries })
}

/// `þ_n = det S_n` in exact arithmetic.
///
/// Odd sizes give zero. Even sizes up to [`PFAFFIAN_MAX`] use the square of
/// the Pfaffian and larger ones fraction-free elimination.
pub fn thorn(n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::domain("thorn needs n >= 1"));
    }
    if n % 2 == 1 {
        return Ok(BigRational::zero());
    }
    if n <= PFAFFIAN_MAX {
        thorn_pfaffian(n)
    } else {
        thorn_bareiss(n)
    }
}

/// `det S_n` as the square of the Pfaffian, by skew-symmetric elimination
/// over the rationals.
pub fn thorn_pfaffian(n: usize) -> Result<BigRational> {
    let m = skew_matrix(n)?;
    if n % 2 == 1 {
        return Ok(BigRational::zero());
    }
    let mut a: Vec<Vec<BigRational>> = m.entries.chunks(n).map(|c| c.to_vec()).collect();
    let mut pf = BigRational::one();
    let mut k = 0;
    while k < n {
        let Some(piv) = (k + 1..n).find(|&j| !a[k][j].is_zero()) else {
            return Ok(BigRational::zero());
        };
        if piv != k + 1 {
            a.swap(k + 1, piv);
            for row in a.iter_mut() {
                row.swap(k + 1, piv);
            }
            pf = -pf;
        }
        let pivot = a[k][k + 1].clone();
        pf *= &pivot;
        for i in k + 2..n {
            for j in k + 2..n {
                let upd = (&a[k + 1][i] * &a[k][j] - &a[k][i] * &a[k + 1][j]) / &pivot;
                a[i][j] += upd;
            }
        }
        k += 2;
    }
    Ok(&pf * &pf)
}

/// `det S_n` by Bareiss elimination on the row-scaled integer matrix.
///
/// Row `r` is multiplied by the least common multiple `D_r` of its
/// denominators, so `det S_n = det M / ∏ D_r`.
pub fn thorn_bareiss(n: usize) -> Result<BigRational> {
    let m = skew_matrix(n)?;
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in m.entries.chunks(n) {
        let lcm = row.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        a.push(row.iter().map(|e| e.numer() * (&lcm / e.denom())).collect());
        scale *= lcm;
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(i) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(BigRational::zero());
            };
            a.swap(k, i);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    Ok(BigRational::new(sign * &a[n - 1][n - 1], scale))
}

fn ln_abs_int(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return libm::log(x.abs().to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    libm::log(top.to_f64().unwrap_or(f64::INFINITY)) + shift as f64 * core::f64::consts::LN_2
}

/// `ln |r|`, `-∞` for zero; accurate for magnitudes far outside `f64` range.
pub fn log_abs(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_int(r.numer()) - ln_abs_int(r.denom())
}

/// Nearest `f64` (underflows to zero, overflows to infinity).
pub fn approx_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let mag = libm::exp(log_abs(r));
    match r.numer().sign() {
        Sign::Minus => -mag,
        _ => mag,
    }
}

impl core::fmt::Display for SkewMatrixN {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for row in self.entries.chunks(self.n) {
            let cells: Vec<_> = row.iter().map(|e| format!("{e}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}
