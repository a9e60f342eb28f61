//! The cubic phase function `Φ_p(v; ω) = ⟨ω, V_p(v)⟩` of the truncated
//! signature coordinates, its gradient and Hessian in `v`, the skew-symmetric
//! matrices `S_n` with their exact determinants `þ_n`, and a Monte Carlo probe
//! of the characteristic function `ψ_p(ξ) = E exp(i⟨ξ, V_p⟩)`.
//!
//! A point `v ∈ ℝ^{2qp}` is laid out as all `x` coefficients followed by all
//! `y` coefficients, each block row-major by component:
//! `v[j·p + r − 1] = x_{jr}` and `v[q·p + j·p + r − 1] = y_{jr}`. The Hessian
//! uses the same ordering, so its `p×p` blocks are `H_xx(j,k)`, `H_xy(j,k)`,
//! `H_yx(j,k)` and `H_yy(j,k)` in that arrangement.
//!
//! The phase is expanded into an explicit list of monomials of degree at most
//! three, one per term of the defining series of `z, u, λ, μ1, μ2, ν, Δ`.
//! Value, gradient and Hessian are then exact derivatives of that list.

mod charfn;
mod omega;
mod thorn;

pub use charfn::{
    charfn_block, charfn_blocks, charfn_estimate, charfn_estimates, charfn_from_blocks, check_samples, combine_blocks,
    CharfnEstimate, JACKKNIFE_BLOCKS, MIN_SAMPLES,
};
pub use omega::Omega;
pub use thorn::{approx_f64, PFAFFIAN_MAX, log_abs, skew_matrix, thorn, thorn_bareiss, thorn_pfaffian, SkewMatrixN};

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fourier_tableau::Tableau;
use crate::lyndon::Word3;

/// A monomial `coef · v[i0] · v[i1] · v[i2]` with `degree` live factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub vars: [u32; 3],
    pub degree: u8,
}

/// `Φ_p(·; ω)` as a sum of monomials in the tableau coefficients.
#[derive(Debug, Clone)]
pub struct PhasePolynomial {
    pub q: usize,
    pub p: usize,
    pub terms: Vec<Monomial>,
}

/// Position of `x_{jr}` (zero-based `j`, one-based `r`) in a phase point.
#[inline]
pub fn x_index(_q: usize, p: usize, j: usize, r: usize) -> usize {
    j * p + r - 1
}

/// Position of `y_{jr}` (zero-based `j`, one-based `r`) in a phase point.
#[inline]
pub fn y_index(q: usize, p: usize, j: usize, r: usize) -> usize {
    q * p + j * p + r - 1
}

/// The phase point `(x, y)` of a tableau.
pub fn phase_point(t: &Tableau) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * t.q * t.p);
    v.extend_from_slice(&t.x);
    v.extend_from_slice(&t.y);
    v
}

/// A tableau with the coefficients of a phase point and `W_1 = 0`.
pub fn tableau_from_point(q: usize, p: usize, v: &[f64]) -> Result<Tableau> {
    if v.len() != 2 * q * p {
        return Err(Error::contract(alloc::format!(
            "phase point has length {} but 2qp = {}",
            v.len(),
            2 * q * p
        )));
    }
    Tableau::from_parts(q, p, vec![0.0; q], v[..q * p].to_vec(), v[q * p..].to_vec())
}

struct Builder {
    q: usize,
    p: usize,
    terms: Vec<Monomial>,
}

impl Builder {
    fn x(&self, j: usize, r: usize) -> u32 {
        x_index(self.q, self.p, j, r) as u32
    }

    fn y(&self, j: usize, r: usize) -> u32 {
        y_index(self.q, self.p, j, r) as u32
    }

    fn push(&mut self, coef: f64, vars: &[u32]) {
        if coef == 0.0 {
            return;
        }
        let mut m = Monomial { coef, vars: [0; 3], degree: vars.len() as u8 };
        m.vars[..vars.len()].copy_from_slice(vars);
        self.terms.push(m);
    }

    /// `coef · Im[ξ_{a,r} ξ_{b,s} conj(ξ_{c,m})]` in real coordinates.
    fn im_triple(&mut self, coef: f64, (a, r): (usize, usize), (b, s): (usize, usize), (c, m): (usize, usize)) {
        let (xa, ya, xb, yb, xc, yc) = (self.x(a, r), self.y(a, r), self.x(b, s), self.y(b, s), self.x(c, m), self.y(c, m));
        self.push(coef, &[xa, yb, xc]);
        self.push(coef, &[ya, xb, xc]);
        self.push(-coef, &[xa, xb, yc]);
        self.push(coef, &[ya, yb, yc]);
    }
}

impl PhasePolynomial {
    /// Expands `⟨ω, V_p⟩` for coefficient count `p`.
    pub fn new(p: usize, w: &Omega) -> Result<Self> {
        if p == 0 {
            return Err(Error::domain("phase polynomial needs p >= 1"));
        }
        let q = w.q;
        let mut b = Builder { q, p, terms: Vec::new() };
        for j in 0..q {
            for r in 1..=p {
                let rf = r as f64;
                let (xj, yj) = (b.x(j, r), b.y(j, r));
                b.push(w.a[j] / rf, &[xj]);
                b.push(w.b[j] / (rf * rf), &[yj]);
            }
        }
        for j in 0..q {
            for k in j..q {
                let (b1, b2) = (w.beta1_at(j, k), w.beta2_at(j, k));
                let al = if j < k { w.alpha_at(j, k) } else { 0.0 };
                for r in 1..=p {
                    let rf = r as f64;
                    let (xj, yj, xk, yk) = (b.x(j, r), b.y(j, r), b.x(k, r), b.y(k, r));
                    b.push(b1 / (rf * rf), &[xj, xk]);
                    b.push(b2 / (rf * rf), &[yj, yk]);
                    b.push(al / rf, &[xj, yk]);
                    b.push(-al / rf, &[yj, xk]);
                }
            }
        }
        for j in 0..q {
            for k in j + 1..q {
                let g = w.gamma_at(j, k);
                if g == 0.0 {
                    continue;
                }
                for r in 1..=p {
                    for s in 1..=p {
                        if r == s {
                            continue;
                        }
                        let (rf, sf) = (r as f64, s as f64);
                        let c = g / (rf * rf - sf * sf);
                        let (xj, xk, yj, yk) = (b.x(j, r), b.x(k, s), b.y(j, r), b.y(k, s));
                        b.push(c * rf / sf, &[xj, xk]);
                        b.push(c, &[yj, yk]);
                    }
                }
            }
        }
        for (idx, word) in w.words.iter().enumerate() {
            let rho = w.rho[idx];
            if rho == 0.0 {
                continue;
            }
            let (j, k, l) = Word3::zero_based(word);
            for m in 2..=p {
                for r in 1..m {
                    let s = m - r;
                    let (rf, sf, mf) = (r as f64, s as f64, m as f64);
                    b.im_triple(-rho / (rf * mf), (j, r), (k, s), (l, m));
                    b.im_triple(rho / (rf * sf), (j, r), (l, s), (k, m));
                    b.im_triple(-rho / (sf * mf), (k, r), (l, s), (j, m));
                }
            }
        }
        Ok(PhasePolynomial { q, p, terms: b.terms })
    }

    /// Length `2qp` of a phase point.
    pub fn dim(&self) -> usize {
        2 * self.q * self.p
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::contract(alloc::format!(
                "phase point has length {} but 2qp = {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `Φ_p(v; ω)`.
    pub fn value(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self
            .terms
            .iter()
            .map(|m| {
                let mut acc = m.coef;
                for &i in &m.vars[..m.degree as usize] {
                    acc *= v[i as usize];
                }
                acc
            })
            .sum())
    }

    /// `∇_v Φ_p(v; ω)`.
    pub fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v)?;
        let mut g = vec![0.0; self.dim()];
        for m in &self.terms {
            let [a, b, c] = m.vars.map(|i| i as usize);
            match m.degree {
                1 => g[a] += m.coef,
                2 => {
                    g[a] += m.coef * v[b];
                    g[b] += m.coef * v[a];
                }
                3 => {
                    g[a] += m.coef * v[b] * v[c];
                    g[b] += m.coef * v[a] * v[c];
                    g[c] += m.coef * v[a] * v[b];
                }
                _ => {}
            }
        }
        Ok(g)
    }

    /// `D²_v Φ_p(v; ω)`.
    pub fn hessian(&self, v: &[f64]) -> Result<DMatrix<f64>> {
        self.check(v)?;
        let n = self.dim();
        let mut h = DMatrix::<f64>::zeros(n, n);
        let mut add = |i: usize, j: usize, val: f64| {
            h[(i, j)] += val;
            h[(j, i)] += val;
        };
        for m in &self.terms {
            let [a, b, c] = m.vars.map(|i| i as usize);
            match m.degree {
                2 => add(a, b, m.coef),
                3 => {
                    add(a, b, m.coef * v[c]);
                    add(a, c, m.coef * v[b]);
                    add(b, c, m.coef * v[a]);
                }
                _ => {}
            }
        }
        Ok(h)
    }
}

/// `Φ_p(v; ω)` where `p = v.len() / (2q)`.
pub fn phase_value(v: &[f64], w: &Omega) -> Result<f64> {
    PhasePolynomial::new(point_p(v, w.q)?, w)?.value(v)
}

/// Analytic gradient of the phase in `v`.
pub fn phase_gradient(v: &[f64], w: &Omega) -> Result<Vec<f64>> {
    PhasePolynomial::new(point_p(v, w.q)?, w)?.gradient(v)
}

/// Analytic Hessian of the phase in `v`, in the block layout of the module docs.
pub fn phase_hessian(v: &[f64], w: &Omega) -> Result<DMatrix<f64>> {
    PhasePolynomial::new(point_p(v, w.q)?, w)?.hessian(v)
}

fn point_p(v: &[f64], q: usize) -> Result<usize> {
    if v.is_empty() || v.len() % (2 * q) != 0 {
        return Err(Error::contract(alloc::format!(
            "phase point length {} is not a positive multiple of 2q = {}",
            v.len(),
            2 * q
        )));
    }
    Ok(v.len() / (2 * q))
}
