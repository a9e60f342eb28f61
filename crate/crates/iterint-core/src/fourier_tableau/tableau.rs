use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{channel, tag, NormalStream};

/// The Gaussian coefficient tableau `{W_1^j, x_{jr}, y_{jr}}` for `r = 1..=p`.
///
/// Coefficients are stored row-major: `x[j*p + (r-1)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tableau {
    pub q: usize,
    pub p: usize,
    pub w1: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

/// Draws a tableau from the counter-keyed stream `(seed, stream)`.
///
/// Entry `(j, r)` depends only on `(seed, stream, j, r)`, so the result is
/// independent of evaluation order and a larger `p` extends a smaller one.
pub fn sample_tableau(q: usize, p: usize, seed: u64, stream: u64) -> Result<Tableau> {
    if q == 0 || p == 0 {
        return Err(Error::domain("sample_tableau requires q >= 1 and p >= 1"));
    }
    let mut t = Tableau::zeros(q, p);
    t.seed = seed;
    t.stream = stream;
    for j in 0..q {
        t.w1[j] = NormalStream::new(seed, stream, channel(tag::W1, j as u64), 0).next_pair().0;
        draw_coefficients(seed, stream, j, 1, &mut t.x[j * p..(j + 1) * p], &mut t.y[j * p..(j + 1) * p]);
    }
    Ok(t)
}

/// Fills `x`, `y` with the coefficients of component `j` for indices `r0, r0+1, ...`.
pub(crate) fn draw_coefficients(seed: u64, stream: u64, j: usize, r0: usize, x: &mut [f64], y: &mut [f64]) {
    let mut s = NormalStream::new(seed, stream, channel(tag::COEFF, j as u64), (r0 - 1) as u64);
    for (xv, yv) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = s.next_pair();
        *xv = a;
        *yv = b;
    }
}

impl Tableau {
    /// The all-zero tableau with provenance `(0, 0)`.
    pub fn zeros(q: usize, p: usize) -> Self {
        Tableau { q, p, w1: vec![0.0; q], x: vec![0.0; q * p], y: vec![0.0; q * p], seed: 0, stream: 0 }
    }

    /// Builds a tableau from explicit arrays.
    pub fn from_parts(q: usize, p: usize, w1: Vec<f64>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if w1.len() != q || x.len() != q * p || y.len() != q * p {
            return Err(Error::contract("tableau arrays do not match q and p"));
        }
        Ok(Tableau { q, p, w1, x, y, seed: 0, stream: 0 })
    }

    /// `x_{jr}` with zero-based `j` and one-based `r`.
    #[inline]
    pub fn xv(&self, j: usize, r: usize) -> f64 {
        self.x[j * self.p + r - 1]
    }

    /// `y_{jr}` with zero-based `j` and one-based `r`.
    #[inline]
    pub fn yv(&self, j: usize, r: usize) -> f64 {
        self.y[j * self.p + r - 1]
    }

    /// Coefficients of component `j` as `x_{jr}` slice.
    pub fn x_row(&self, j: usize) -> &[f64] {
        &self.x[j * self.p..(j + 1) * self.p]
    }

    /// Coefficients of component `j` as `y_{jr}` slice.
    pub fn y_row(&self, j: usize) -> &[f64] {
        &self.y[j * self.p..(j + 1) * self.p]
    }

    /// `ξ_{jr} = x_{jr} + i y_{jr}` for `r = 1..=p`.
    pub fn xi(&self, j: usize) -> Vec<Complex64> {
        self.x_row(j).iter().zip(self.y_row(j)).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.w1.iter().chain(&self.x).chain(&self.y).all(|v| v.is_finite())
    }

    /// The first `p` modes of this tableau.
    pub fn truncate(&self, p: usize) -> Result<Tableau> {
        if p == 0 || p > self.p {
            return Err(Error::domain(format!("cannot truncate p={} to {p}", self.p)));
        }
        let mut t = Tableau::zeros(self.q, p);
        t.seed = self.seed;
        t.stream = self.stream;
        t.w1.copy_from_slice(&self.w1);
        for j in 0..self.q {
            t.x[j * p..(j + 1) * p].copy_from_slice(&self.x_row(j)[..p]);
            t.y[j * p..(j + 1) * p].copy_from_slice(&self.y_row(j)[..p]);
        }
        Ok(t)
    }

    /// Appends explicit coefficients for indices `p+1..=p+m`; `ext_x`, `ext_y` are `q×m` row-major.
    pub fn with_extension(&self, m: usize, ext_x: &[f64], ext_y: &[f64]) -> Result<Tableau> {
        if ext_x.len() != self.q * m || ext_y.len() != self.q * m {
            return Err(Error::contract("extension arrays must be q×m"));
        }
        let n = self.p + m;
        let mut t = Tableau::zeros(self.q, n);
        t.seed = self.seed;
        t.stream = self.stream;
        t.w1.copy_from_slice(&self.w1);
        for j in 0..self.q {
            t.x[j * n..j * n + self.p].copy_from_slice(self.x_row(j));
            t.y[j * n..j * n + self.p].copy_from_slice(self.y_row(j));
            t.x[j * n + self.p..(j + 1) * n].copy_from_slice(&ext_x[j * m..(j + 1) * m]);
            t.y[j * n + self.p..(j + 1) * n].copy_from_slice(&ext_y[j * m..(j + 1) * m]);
        }
        Ok(t)
    }

    /// Extends to `n > p` modes by continuing this tableau's own stream.
    pub fn extend_to(&self, n: usize) -> Result<Tableau> {
        if n <= self.p {
            return Err(Error::domain(format!("extension target N={n} must exceed p={}", self.p)));
        }
        let m = n - self.p;
        let mut ex = vec![0.0; self.q * m];
        let mut ey = vec![0.0; self.q * m];
        for j in 0..self.q {
            draw_coefficients(self.seed, self.stream, j, self.p + 1, &mut ex[j * m..(j + 1) * m], &mut ey[j * m..(j + 1) * m]);
        }
        self.with_extension(m, &ex, &ey)
    }

    /// Evaluates the `p`-truncated Brownian bridge `W_t - tW_1` at `time`.
    ///
    /// Component `j` equals
    /// `Σ_r [x_{jr}(cos 2πrt − 1) + y_{jr} sin 2πrt] / (√2 π r)`, i.e. the
    /// cosine/sine series with spectral weights `1/r` and constant term
    /// `x_{j0}/(2√2π)` where `x_{j0} = −2 z_j`. It vanishes at `t = 0` and `t = 1`.
    pub fn bridge_eval(&self, time: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&time) {
            return Err(Error::domain(format!("bridge time {time} outside [0,1]")));
        }
        let (sin_step, cos_step) = libm::sincos(2.0 * PI * time);
        let step = Complex64::new(cos_step, sin_step);
        let mut out = vec![0.0; self.q];
        for (j, o) in out.iter_mut().enumerate() {
            let mut e = Complex64::new(1.0, 0.0);
            let mut acc = 0.0;
            for r in 1..=self.p {
                e *= step;
                if r % 64 == 0 {
                    let (s, c) = libm::sincos(2.0 * PI * time * r as f64);
                    e = Complex64::new(c, s);
                }
                acc += (self.xv(j, r) * (e.re - 1.0) + self.yv(j, r) * e.im) / r as f64;
            }
            *o = acc / (SQRT_2 * PI);
        }
        Ok(out)
    }

    /// Evaluates the truncated path `W_t = tW_1 + bridge(t)`.
    pub fn path_eval(&self, time: f64) -> Result<Vec<f64>> {
        let mut b = self.bridge_eval(time)?;
        for (v, w) in b.iter_mut().zip(&self.w1) {
            *v += time * w;
        }
        Ok(b)
    }

    /// Self-describing little-endian binary encoding; decoding is bit-exact.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + 8 * (self.q + 2 * self.q * self.p));
        out.extend_from_slice(TABLEAU_MAGIC);
        out.extend_from_slice(&TABLEAU_VERSION.to_le_bytes());
        for v in [self.q as u64, self.p as u64, self.seed, self.stream] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.w1.iter().chain(&self.x).chain(&self.y) {
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        out
    }

    /// Decodes [`Tableau::to_bytes`] output.
    pub fn from_bytes(bytes: &[u8]) -> Result<Tableau> {
        let mut cur = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(Error::format("truncated tableau container"));
            }
            let (a, b) = cur.split_at(n);
            cur = b;
            Ok(a)
        };
        if take(TABLEAU_MAGIC.len())? != TABLEAU_MAGIC {
            return Err(Error::format("bad tableau magic"));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != TABLEAU_VERSION {
            return Err(Error::format(format!("unsupported tableau version {version}")));
        }
        let mut hdr = [0u64; 4];
        for h in hdr.iter_mut() {
            *h = u64::from_le_bytes(take(8)?.try_into().unwrap());
        }
        let (q, p) = (hdr[0] as usize, hdr[1] as usize);
        if q == 0 || p == 0 || q > 1 << 16 || p > 1 << 28 {
            return Err(Error::format("implausible tableau dimensions"));
        }
        let mut read = |n: usize| -> Result<Vec<f64>> {
            (0..n).map(|_| Ok(f64::from_bits(u64::from_le_bytes(take(8)?.try_into().unwrap())))).collect()
        };
        let w1 = read(q)?;
        let x = read(q * p)?;
        let y = read(q * p)?;
        if !cur.is_empty() {
            return Err(Error::format("trailing bytes after tableau"));
        }
        Ok(Tableau { q, p, w1, x, y, seed: hdr[2], stream: hdr[3] })
    }
}

/// Magic prefix of the binary tableau container.
pub const TABLEAU_MAGIC: &[u8; 8] = b"ITERTAB\0";
/// Format version of the binary tableau container.
pub const TABLEAU_VERSION: u32 = 1;
