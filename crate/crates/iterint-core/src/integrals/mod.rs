//! Level-3 signatures (Wiener increments, double and triple iterated
//! integrals, and the mixed time integrals) assembled from the Fourier
//! coefficients, plus Brownian scaling, Itô conversion and Chen concatenation.
//!
//! Index convention: `I_{jk} = ∫∫_{s<t} dW^j_s dW^k_t` and
//! `I_{jkl} = ∫∫∫_{u<s<t} dW^j_u dW^k_s dW^l_t`; the first index is innermost.
//! The mixed integrals are `∫ W^j_s ds` (`int_w_dt`) and `∫ s dW^j_s`
//! (`int_t_dw`).

mod quadrature;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier_tableau::{delta_tensor, partial_sums_with, Convolver, DeltaTensor, PartialSums, Tableau};

pub use quadrature::quadrature_oracle;

/// Stochastic-integral convention of an [`IntegralSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Stratonovich,
    Ito,
}

/// A level-3 signature on an interval of length `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralSet {
    pub q: usize,
    pub h: f64,
    pub dw: Vec<f64>,
    /// `q×q` row-major.
    pub i2: Vec<f64>,
    /// `q×q×q` row-major.
    pub i3: Vec<f64>,
    /// `∫ W^j ds` over the interval, measured from the left endpoint.
    pub int_w_dt: Vec<f64>,
    /// `∫ (s − a) dW^j_s` over the interval `[a, a + h]`.
    pub int_t_dw: Vec<f64>,
    pub convention: Convention,
}

impl IntegralSet {
    /// The signature of the empty interval.
    pub fn identity(q: usize) -> Self {
        IntegralSet {
            q,
            h: 0.0,
            dw: vec![0.0; q],
            i2: vec![0.0; q * q],
            i3: vec![0.0; q * q * q],
            int_w_dt: vec![0.0; q],
            int_t_dw: vec![0.0; q],
            convention: Convention::Stratonovich,
        }
    }

    /// Signature of a straight segment with increment `dw` over time `h`.
    pub fn linear_segment(h: f64, dw: &[f64]) -> Self {
        let q = dw.len();
        let mut s = IntegralSet::identity(q);
        s.h = h;
        s.dw.copy_from_slice(dw);
        for j in 0..q {
            s.int_w_dt[j] = 0.5 * h * dw[j];
            s.int_t_dw[j] = 0.5 * h * dw[j];
            for k in 0..q {
                s.i2[j * q + k] = 0.5 * dw[j] * dw[k];
                for l in 0..q {
                    s.i3[(j * q + k) * q + l] = dw[j] * dw[k] * dw[l] / 6.0;
                }
            }
        }
        s
    }

    #[inline]
    pub fn i2_at(&self, j: usize, k: usize) -> f64 {
        self.i2[j * self.q + k]
    }

    #[inline]
    pub fn i3_at(&self, j: usize, k: usize, l: usize) -> f64 {
        self.i3[(j * self.q + k) * self.q + l]
    }
}

/// `I°_{jk} = ½W^jW^k + (W^j z_k − W^k z_j)/(√2π) + λ_{jk}/(2π)` on `[0,1]`.
pub fn double_integral(w1: &[f64], s: &PartialSums) -> Result<Vec<f64>> {
    let q = s.q;
    if w1.len() != q {
        return Err(Error::contract("W_1 length differs from q"));
    }
    let mut out = vec![0.0; q * q];
    for j in 0..q {
        for k in 0..q {
            out[j * q + k] = if j == k {
                0.5 * w1[j] * w1[j]
            } else {
                0.5 * w1[j] * w1[k]
                    + (w1[j] * s.z[k] - w1[k] * s.z[j]) / (SQRT_2 * PI)
                    + s.lambda_full(j, k) / (2.0 * PI)
            };
        }
    }
    Ok(out)
}

/// `I°_{jkl}` on `[0,1]` for all triples, with `ν_{kj}` taken from the `ν` identity.
pub fn triple_integral(w1: &[f64], s: &PartialSums, delta: &DeltaTensor) -> Result<Vec<f64>> {
    triple_integral_with_nu(w1, s, delta, |j, k| s.nu_full(j, k))
}

/// `I°_{jkl}` with a caller-supplied `ν_{jk}` for ordered pairs `j ≠ k`.
///
/// With `c = √2`, the representation is
///
/// ```text
/// I°_jkl = W^jW^kW^l/6
///   − W^kW^l (z_j − u_j/π)/(2cπ) − W^jW^l u_k/(cπ²) + W^jW^k (z_l + u_l/π)/(2cπ)
///   + W^j [λ_kl/(4π) + z_k z_l/(2π²) + (μ2_kl − μ1_kl)/(8π²) − ν_kl/(2π²)]
///   − W^k [z_j z_l/(2π²) + (μ1_jl + μ2_jl)/(4π²)]
///   + W^l [λ_jk/(4π) + z_j z_k/(2π²) + (μ2_jk − μ1_jk)/(8π²) − ν_kj/(2π²)]
///   + (z_l λ_jk − z_j λ_kl)/(2cπ²) + Δ_jkl/(4cπ²)
/// ```
///
/// where `ν_jj = (z_j² − μ1_jj)/2`.
pub fn triple_integral_with_nu<F: Fn(usize, usize) -> f64>(
    w1: &[f64],
    s: &PartialSums,
    delta: &DeltaTensor,
    nu: F,
) -> Result<Vec<f64>> {
    let q = s.q;
    if w1.len() != q || delta.q != q {
        return Err(Error::contract("dimensions of W_1, sums and Δ differ"));
    }
    let pi2 = PI * PI;
    let c = SQRT_2;
    let nu_full = |j: usize, k: usize| if j == k { s.nu_full(j, j) } else { nu(j, k) };
    let mut out = vec![0.0; q * q * q];
    for j in 0..q {
        for k in 0..q {
            for l in 0..q {
                let (wj, wk, wl) = (w1[j], w1[k], w1[l]);
                let (z, u) = (&s.z, &s.u);
                let mut v = wj * wk * wl / 6.0;
                v -= wk * wl * (z[j] - u[j] / PI) / (2.0 * c * PI);
                v -= wj * wl * u[k] / (c * pi2);
                v += wj * wk * (z[l] + u[l] / PI) / (2.0 * c * PI);
                v += wj
                    * (s.lambda_full(k, l) / (4.0 * PI) + z[k] * z[l] / (2.0 * pi2)
                        + (s.mu2_full(k, l) - s.mu1_full(k, l)) / (8.0 * pi2)
                        - nu_full(k, l) / (2.0 * pi2));
                v -= wk * (z[j] * z[l] / (2.0 * pi2) + (s.mu1_full(j, l) + s.mu2_full(j, l)) / (4.0 * pi2));
                v += wl
                    * (s.lambda_full(j, k) / (4.0 * PI) + z[j] * z[k] / (2.0 * pi2)
                        + (s.mu2_full(j, k) - s.mu1_full(j, k)) / (8.0 * pi2)
                        - nu_full(k, j) / (2.0 * pi2));
                v += (z[l] * s.lambda_full(j, k) - z[j] * s.lambda_full(k, l)) / (2.0 * c * pi2);
                v += delta.get(j, k, l) / (4.0 * c * pi2);
                out[(j * q + k) * q + l] = v;
            }
        }
    }
    Ok(out)
}

/// `∫_0^1 W^j ds = W^j/2 − z_j/(√2π)` and `∫_0^1 s dW^j = W^j − ∫_0^1 W^j ds`.
pub fn mixed_integrals(w1: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let wdt: Vec<f64> = w1.iter().zip(z).map(|(w, zz)| 0.5 * w - zz / (SQRT_2 * PI)).collect();
    let tdw: Vec<f64> = w1.iter().zip(&wdt).map(|(w, a)| w - a).collect();
    (wdt, tdw)
}

/// Assembles the Stratonovich signature on `[0,1]` from precomputed sums.
pub fn integral_set_from_sums(w1: &[f64], s: &PartialSums, delta: &DeltaTensor) -> Result<IntegralSet> {
    let (int_w_dt, int_t_dw) = mixed_integrals(w1, &s.z);
    Ok(IntegralSet {
        q: s.q,
        h: 1.0,
        dw: w1.to_vec(),
        i2: double_integral(w1, s)?,
        i3: triple_integral(w1, s, delta)?,
        int_w_dt,
        int_t_dw,
        convention: Convention::Stratonovich,
    })
}

/// Assembles the Stratonovich signature on `[0,1]` from a tableau.
pub fn integral_set<C: Convolver + ?Sized>(t: &Tableau, conv: &mut C) -> IntegralSet {
    let s = partial_sums_with(t, conv);
    let delta = delta_tensor(t, conv);
    integral_set_from_sums(&t.w1, &s, &delta).expect("shapes agree by construction")
}

/// Converts Stratonovich integrals to Itô integrals.
///
/// `I_jk = I°_jk − ½δ_jk h` and
/// `I_jkl = I°_jkl − ½δ_jk ∫s dW^l − ½δ_kl ∫W^j ds`; the mixed integrals are unchanged.
pub fn stratonovich_to_ito(set: &IntegralSet) -> Result<IntegralSet> {
    if set.convention != Convention::Stratonovich {
        return Err(Error::domain("input must use the Stratonovich convention"));
    }
    let mut out = set.clone();
    apply_correction(&mut out, -0.5);
    out.convention = Convention::Ito;
    Ok(out)
}

/// Inverse of [`stratonovich_to_ito`].
pub fn ito_to_stratonovich(set: &IntegralSet) -> Result<IntegralSet> {
    if set.convention != Convention::Ito {
        return Err(Error::domain("input must use the Itô convention"));
    }
    let mut out = set.clone();
    apply_correction(&mut out, 0.5);
    out.convention = Convention::Stratonovich;
    Ok(out)
}

fn apply_correction(s: &mut IntegralSet, sign: f64) {
    let q = s.q;
    for j in 0..q {
        s.i2[j * q + j] += sign * s.h;
        for k in 0..q {
            for l in 0..q {
                let mut c = 0.0;
                if j == k {
                    c += s.int_t_dw[l];
                }
                if k == l {
                    c += s.int_w_dt[j];
                }
                s.i3[(j * q + k) * q + l] += sign * c;
            }
        }
    }
}

/// Rescales a unit-interval signature to `[0, h]` by Brownian scaling.
pub fn scale_to_interval(set: &IntegralSet, h: f64) -> Result<IntegralSet> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain("step h must be positive and finite"));
    }
    if set.h != 1.0 {
        return Err(Error::domain("scale_to_interval expects a unit-interval signature"));
    }
    let sh = libm::sqrt(h);
    let h32 = h * sh;
    let mut out = set.clone();
    out.h = h;
    out.dw.iter_mut().for_each(|v| *v *= sh);
    out.i2.iter_mut().for_each(|v| *v *= h);
    out.i3.iter_mut().for_each(|v| *v *= h32);
    out.int_w_dt.iter_mut().for_each(|v| *v *= h32);
    out.int_t_dw.iter_mut().for_each(|v| *v *= h32);
    Ok(out)
}

/// Chen concatenation: the signature over `[a, c]` from those over `[a, b]` and `[b, c]`.
pub fn chen_concat(a: &IntegralSet, b: &IntegralSet) -> Result<IntegralSet> {
    if a.q != b.q {
        return Err(Error::domain("signatures have different dimensions"));
    }
    if a.convention != Convention::Stratonovich || b.convention != Convention::Stratonovich {
        return Err(Error::domain("Chen concatenation requires Stratonovich signatures"));
    }
    let q = a.q;
    let mut out = IntegralSet::identity(q);
    out.h = a.h + b.h;
    for j in 0..q {
        out.dw[j] = a.dw[j] + b.dw[j];
        out.int_w_dt[j] = a.int_w_dt[j] + b.int_w_dt[j] + a.dw[j] * b.h;
        out.int_t_dw[j] = a.int_t_dw[j] + b.int_t_dw[j] + a.h * b.dw[j];
        for k in 0..q {
            out.i2[j * q + k] = a.i2[j * q + k] + b.i2[j * q + k] + a.dw[j] * b.dw[k];
            for l in 0..q {
                let idx = (j * q + k) * q + l;
                out.i3[idx] = a.i3[idx] + b.i3[idx] + a.i2[j * q + k] * b.dw[l] + a.dw[j] * b.i2[k * q + l];
            }
        }
    }
    Ok(out)
}
