//! Conditional moments of the tail `Ṽ_{p,N}` given the retained coefficients.
//!
//! Conditionally on `v_p`, every tail block is a polynomial of degree at most
//! three in the independent tail Gaussians `x_{jr}, y_{jr}` (`p < r <= N`).
//! The covariance is assembled from its Wiener-chaos decomposition:
//!
//! * order 1: `z̃`, `ũ`, the parts of `ν̃` with one retained index and the
//!   parts of `Δ̃` with both `r, s <= p`;
//! * order 2: `λ̃`, `μ̃`, the pure-tail part of `ν̃`, and the parts of `Δ̃`
//!   with exactly one retained index;
//! * order 3: the pure-tail part of `Δ̃`.
//!
//! Chaos components of different order are uncorrelated. Order-2 products of
//! `Δ̃` always pair indices `σ` and `σ + ρ` with a retained `ρ <= p`, so all
//! sums over `σ` are tabulated once per `(p, N)` and the per-tableau cost is
//! `O(pN)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::convolve::Convolver;
use super::sums::{strict_index, upper_index};
use super::tableau::{draw_coefficients, Tableau};
use super::{partial_sums_with, DirectConvolver};
use crate::error::{Error, Result};
use crate::lyndon::{layout, IndexLayout};
use crate::rng::derive_stream;

/// `Σ_{p < r <= n} r^{-2}`; `n = None` gives the infinite tail `π²/6 − Σ_{r<=p} r^{-2}`.
pub fn zeta2_tail(p: usize, n: Option<usize>) -> f64 {
    match n {
        Some(n) => (p + 1..=n).rev().map(|r| 1.0 / (r as f64 * r as f64)).sum(),
        None => {
            let head: f64 = (1..=p).rev().map(|r| 1.0 / (r as f64 * r as f64)).sum();
            PI * PI / 6.0 - head
        }
    }
}

/// `E[Ṽ_p | v_p]` for the untruncated tail, flattened in layout order.
///
/// Every block vanishes except the diagonals of `μ1` and `μ2`, which equal
/// `Σ_{r>p} r^{-2}`. The value does not depend on the retained coefficients.
pub fn conditional_tail_mean(t: &Tableau) -> Vec<f64> {
    mean_with(t.q, zeta2_tail(t.p, None))
}

/// `E[Ṽ_{p,N} | v_p]` for the tail truncated at `N`.
pub fn conditional_tail_mean_truncated(t: &Tableau, n: usize) -> Result<Vec<f64>> {
    if n <= t.p {
        return Err(Error::domain("truncated tail mean requires N > p"));
    }
    Ok(mean_with(t.q, zeta2_tail(t.p, Some(n))))
}

fn mean_with(q: usize, diag: f64) -> Vec<f64> {
    let lay = layout(q).expect("q >= 1");
    let mut m = vec![0.0; lay.d];
    for j in 0..q {
        m[lay.mu1 + upper_index(q, j, j)] = diag;
        m[lay.mu2 + upper_index(q, j, j)] = diag;
    }
    m
}

/// How to obtain `Cov(Ṽ_{p,N} | v_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceMethod {
    /// Closed-form chaos sums with tail truncation `n`.
    Analytic { n: usize },
    /// Resampling of the tail at truncation `n` with `samples` draws from `seed`.
    InnerMc { n: usize, samples: usize, seed: u64 },
}

/// `Cov(Ṽ_{p,N} | v_p)` as a row-major `d×d` matrix.
pub fn conditional_tail_covariance(t: &Tableau, method: CovarianceMethod) -> Result<Vec<f64>> {
    match method {
        CovarianceMethod::Analytic { n } => {
            let tables = TailCovarianceTables::new(t.q, t.p, n)?;
            tables.covariance(t)
        }
        CovarianceMethod::InnerMc { n, samples, seed } => {
            inner_mc_covariance(t, n, samples, seed, &mut DirectConvolver)
        }
    }
}

/// Inner Monte Carlo estimate of `Cov(Ṽ_{p,N} | v_p)` with an explicit backend.
pub fn inner_mc_covariance<C: Convolver + ?Sized>(
    t: &Tableau,
    n: usize,
    samples: usize,
    seed: u64,
    conv: &mut C,
) -> Result<Vec<f64>> {
    if n <= t.p {
        return Err(Error::domain("inner Monte Carlo requires N > p"));
    }
    if samples < 2 {
        return Err(Error::domain("inner Monte Carlo requires at least two samples"));
    }
    let q = t.q;
    let m = n - t.p;
    let head = partial_sums_with(t, conv).flatten();
    let d = head.len();
    let mut mean = vec![0.0; d];
    let mut m2 = vec![0.0; d * d];
    let mut ex = vec![0.0; q * m];
    let mut ey = vec![0.0; q * m];
    for i in 0..samples {
        let stream = derive_stream(t.stream ^ 0x5eed_0000_0000_0000, i as u64);
        for j in 0..q {
            draw_coefficients(seed, stream, j, t.p + 1, &mut ex[j * m..(j + 1) * m], &mut ey[j * m..(j + 1) * m]);
        }
        let full = partial_sums_with(&t.with_extension(m, &ex, &ey)?, conv).flatten();
        let v: Vec<f64> = full.iter().zip(&head).map(|(a, b)| a - b).collect();
        // Welford update of mean and co-moment.
        let k = (i + 1) as f64;
        let delta: Vec<f64> = v.iter().zip(&mean).map(|(a, b)| a - b).collect();
        for (mu, dl) in mean.iter_mut().zip(&delta) {
            *mu += dl / k;
        }
        for a in 0..d {
            let da = delta[a];
            for b in 0..d {
                m2[a * d + b] += da * (v[b] - mean[b]);
            }
        }
    }
    let denom = (samples - 1) as f64;
    for a in 0..d {
        for b in 0..a {
            let s = 0.5 * (m2[a * d + b] + m2[b * d + a]);
            m2[a * d + b] = s;
            m2[b * d + a] = s;
        }
    }
    Ok(m2.into_iter().map(|v| v / denom).collect())
}

/// One line of the `Δ` series: `coef · Im[ξ_a,r ξ_b,s conj(ξ_e,r+s)]`.
#[derive(Debug, Clone, Copy)]
struct Line {
    a: usize,
    b: usize,
    e: usize,
    kind: u8,
}

impl Line {
    /// Coefficient of the line at `(r, s)`.
    fn coef(&self, r: f64, s: f64) -> f64 {
        let t = r + s;
        match self.kind {
            0 => -1.0 / (r * t),
            1 => 1.0 / (r * s),
            _ => -1.0 / (s * t),
        }
    }
}

fn word_lines(j: usize, k: usize, l: usize) -> [Line; 3] {
    [
        Line { a: j, b: k, e: l, kind: 0 },
        Line { a: j, b: l, e: k, kind: 1 },
        Line { a: k, b: l, e: j, kind: 2 },
    ]
}

/// Retained-independent sums needed by the analytic conditional covariance.
#[derive(Debug, Clone)]
pub struct TailCovarianceTables {
    pub q: usize,
    pub p: usize,
    pub n: usize,
    layout: IndexLayout,
    /// `G[ρ][m][m'] = Σ_σ φ_m φ_m'` with `φ = (1/(ρ(σ+ρ)), 1/(σ(σ+ρ)), 1/(ρσ))`.
    g: Vec<[[f64; 3]; 3]>,
    /// `H[ρ][m][n] = Σ_σ φ_m ψ_n` with the pure-tail `ν` weights `ψ`.
    h: Vec<[[f64; 3]; 3]>,
    s2: f64,
    s4: f64,
    nu_pure: f64,
    c3: Vec<f64>,
}

impl TailCovarianceTables {
    /// Tabulates all retained-independent sums for tail truncation `n`.
    pub fn new(q: usize, p: usize, n: usize) -> Result<Self> {
        if n <= p || p == 0 {
            return Err(Error::domain("analytic covariance requires 1 <= p < N"));
        }
        let lay = layout(q)?;
        let mut g = vec![[[0.0; 3]; 3]; p + 1];
        let mut h = vec![[[0.0; 3]; 3]; p + 1];
        for rho in 1..=p {
            let rf = rho as f64;
            for sigma in p + 1..=n.saturating_sub(rho) {
                let sf = sigma as f64;
                let phi = [1.0 / (rf * (sf + rf)), 1.0 / (sf * (sf + rf)), 1.0 / (rf * sf)];
                let dd = rf * (2.0 * sf + rf);
                let psi = [-sf / ((sf + rf) * dd), -1.0 / dd, (sf + rf) / (sf * dd)];
                for a in 0..3 {
                    for b in 0..3 {
                        g[rho][a][b] += phi[a] * phi[b];
                        h[rho][a][b] += phi[a] * psi[b];
                    }
                }
            }
        }
        let s2 = zeta2_tail(p, Some(n));
        let s4: f64 = (p + 1..=n).rev().map(|r| { let r2 = (r as f64) * (r as f64); 1.0 / (r2 * r2) }).sum();
        let mut nu_pure = 0.0;
        for r in p + 1..=n {
            for s in p + 1..=n {
                if r != s {
                    let (rf, sf) = (r as f64, s as f64);
                    let den = rf * rf - sf * sf;
                    nu_pure += ((rf / sf) * (rf / sf) + 1.0) / (den * den);
                }
            }
        }
        let nw = lay.words.len();
        let lines: Vec<[Line; 3]> = lay
            .words
            .iter()
            .map(|w| {
                let (j, k, l) = w.zero_based();
                word_lines(j, k, l)
            })
            .collect();
        let mut c3 = vec![0.0; nw * nw];
        for r in p + 1..=n {
            for s in p + 1..=n.saturating_sub(r) {
                let (rf, sf) = (r as f64, s as f64);
                for (iw, lw) in lines.iter().enumerate() {
                    for (iv, lv) in lines.iter().enumerate().skip(iw) {
                        let mut acc = 0.0;
                        for a in lw {
                            let ca = a.coef(rf, sf);
                            for b in lv {
                                if a.e != b.e {
                                    continue;
                                }
                                if a.a == b.a && a.b == b.b {
                                    acc += ca * b.coef(rf, sf);
                                }
                                if a.a == b.b && a.b == b.a {
                                    acc += ca * b.coef(sf, rf);
                                }
                            }
                        }
                        c3[iw * nw + iv] += 4.0 * acc;
                    }
                }
            }
        }
        for iw in 0..nw {
            for iv in 0..iw {
                c3[iw * nw + iv] = c3[iv * nw + iw];
            }
        }
        Ok(TailCovarianceTables { q, p, n, layout: lay, g, h, s2, s4, nu_pure, c3 })
    }

    /// `Cov(Ṽ_{p,N} | v_p)` for a tableau with `t.p == self.p`, row-major `d×d`.
    pub fn covariance(&self, t: &Tableau) -> Result<Vec<f64>> {
        if t.q != self.q || t.p != self.p {
            return Err(Error::contract("tableau shape differs from covariance tables"));
        }
        let (q, p, n) = (self.q, self.p, self.n);
        let lay = &self.layout;
        let d = lay.d;
        let m = n - p;
        let mut cov = vec![0.0; d * d];

        // Order 1: explicit coefficient vectors over tail variables (type, r).
        let var = |ty: usize, r: usize| ty * m + (r - p - 1);
        let mut l1: Vec<(usize, Vec<f64>)> = Vec::new();
        for a in 0..q {
            let mut cz = vec![0.0; 2 * q * m];
            let mut cu = vec![0.0; 2 * q * m];
            for r in p + 1..=n {
                cz[var(a, r)] = 1.0 / r as f64;
                cu[var(q + a, r)] = 1.0 / (r as f64 * r as f64);
            }
            l1.push((lay.z + a, cz));
            l1.push((lay.u + a, cu));
        }
        for j in 0..q {
            for k in j + 1..q {
                let mut c = vec![0.0; 2 * q * m];
                for r in p + 1..=n {
                    let rf = r as f64;
                    let (mut xj, mut yj, mut xk, mut yk) = (0.0, 0.0, 0.0, 0.0);
                    for s in 1..=p {
                        let sf = s as f64;
                        let inv = 1.0 / (rf * rf - sf * sf);
                        xj += (rf / sf) * t.xv(k, s) * inv;
                        yj += t.yv(k, s) * inv;
                        xk -= (sf / rf) * t.xv(j, s) * inv;
                        yk -= t.yv(j, s) * inv;
                    }
                    c[var(j, r)] += xj;
                    c[var(q + j, r)] += yj;
                    c[var(k, r)] += xk;
                    c[var(q + k, r)] += yk;
                }
                l1.push((lay.nu + strict_index(q, j, k), c));
            }
        }
        let xi: Vec<Vec<Complex64>> = (0..q).map(|a| t.xi(a)).collect();
        let lines: Vec<[Line; 3]> = lay
            .words
            .iter()
            .map(|w| {
                let (j, k, l) = w.zero_based();
                word_lines(j, k, l)
            })
            .collect();
        for (iw, lw) in lines.iter().enumerate() {
            let mut c = vec![0.0; 2 * q * m];
            for r in 1..=p {
                for s in 1..=p {
                    let tt = r + s;
                    if tt <= p || tt > n {
                        continue;
                    }
                    for ln in lw {
                        let kk = xi[ln.a][r - 1] * xi[ln.b][s - 1] * ln.coef(r as f64, s as f64);
                        c[var(ln.e, tt)] += kk.im;
                        c[var(q + ln.e, tt)] -= kk.re;
                    }
                }
            }
            l1.push((lay.delta + iw, c));
        }
        for (ia, (pa, va)) in l1.iter().enumerate() {
            for (pb, vb) in l1.iter().skip(ia) {
                let s: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                cov[pa * d + pb] += s;
                if pa != pb {
                    cov[pb * d + pa] += s;
                }
            }
        }

        // Order 2, pure tail: diagonal in the block coordinates.
        for j in 0..q {
            for k in j..q {
                let iu = upper_index(q, j, k);
                let v = if j == k { 2.0 * self.s4 } else { self.s4 };
                cov[(lay.mu1 + iu) * d + lay.mu1 + iu] += v;
                cov[(lay.mu2 + iu) * d + lay.mu2 + iu] += v;
                if j < k {
                    let is = strict_index(q, j, k);
                    cov[(lay.lambda + is) * d + lay.lambda + is] += 2.0 * self.s2;
                    cov[(lay.nu + is) * d + lay.nu + is] += self.nu_pure;
                }
            }
        }

        // Order 2, one retained index in Δ: A_w[ρ][u][v][m] with u, v in 0..2q.
        let tq = 2 * q;
        let stride = tq * tq * 3;
        let nw = lay.words.len();
        let mut amix = vec![0.0; nw * (p + 1) * stride];
        let at = |iw: usize, rho: usize, u: usize, v: usize, mm: usize| {
            ((iw * (p + 1) + rho) * tq * tq + u * tq + v) * 3 + mm
        };
        for (iw, lw) in lines.iter().enumerate() {
            for rho in 1..=p {
                if p + 1 + rho > n {
                    continue;
                }
                for ln in lw {
                    // (basis, sign, retained value, lower type, upper type) for both placements.
                    let (ba, sa) = match ln.kind {
                        0 => (0, -1.0),
                        1 => (2, 1.0),
                        _ => (1, -1.0),
                    };
                    let (bb, sb) = match ln.kind {
                        0 => (1, -1.0),
                        1 => (2, 1.0),
                        _ => (0, -1.0),
                    };
                    let placements = [(ba, sa, xi[ln.a][rho - 1], ln.b, ln.e), (bb, sb, xi[ln.b][rho - 1], ln.a, ln.e)];
                    for (mm, sg, rv, lo, up) in placements {
                        amix[at(iw, rho, lo, up, mm)] += sg * rv.im;
                        amix[at(iw, rho, q + lo, q + up, mm)] += sg * rv.im;
                        amix[at(iw, rho, q + lo, up, mm)] += sg * rv.re;
                        amix[at(iw, rho, lo, q + up, mm)] -= sg * rv.re;
                    }
                }
            }
        }
        for iw in 0..nw {
            for iv in iw..nw {
                let mut acc = 0.0;
                for rho in 1..=p {
                    let gg = &self.g[rho];
                    for u in 0..tq {
                        for v in 0..tq {
                            for a in 0..3 {
                                let x = amix[at(iw, rho, u, v, a)];
                                if x == 0.0 {
                                    continue;
                                }
                                for b in 0..3 {
                                    acc += x * amix[at(iv, rho, u, v, b)] * gg[a][b];
                                }
                            }
                        }
                    }
                }
                let (pa, pb) = (lay.delta + iw, lay.delta + iv);
                cov[pa * d + pb] += acc;
                if iw != iv {
                    cov[pb * d + pa] += acc;
                }
            }
        }
        for j in 0..q {
            for k in j + 1..q {
                let pn = lay.nu + strict_index(q, j, k);
                for iw in 0..nw {
                    let mut acc = 0.0;
                    for rho in 1..=p {
                        let hh = &self.h[rho];
                        for a in 0..3 {
                            acc += amix[at(iw, rho, j, k, a)] * hh[a][0]
                                + amix[at(iw, rho, q + j, q + k, a)] * hh[a][1]
                                + amix[at(iw, rho, k, j, a)] * hh[a][2]
                                - amix[at(iw, rho, q + k, q + j, a)] * hh[a][1];
                        }
                    }
                    let pd = lay.delta + iw;
                    cov[pn * d + pd] += acc;
                    cov[pd * d + pn] += acc;
                }
            }
        }

        // Order 3: pure-tail Δ.
        for iw in 0..nw {
            for iv in 0..nw {
                cov[(lay.delta + iw) * d + lay.delta + iv] += self.c3[iw * nw + iv];
            }
        }
        Ok(cov)
    }
}
