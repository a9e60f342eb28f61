use alloc::vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::{Convention, IntegralSet};
use crate::error::{Error, Result};
use crate::fourier_tableau::Tableau;

/// Values of the truncated path and its derivative at one time.
fn path_and_velocity(t: &Tableau, time: f64, w: &mut [f64], dw: &mut [f64]) {
    let (s1, c1) = libm::sincos(2.0 * PI * time);
    let step = Complex64::new(c1, s1);
    for j in 0..t.q {
        let mut e = Complex64::new(1.0, 0.0);
        let (mut b, mut db) = (0.0, 0.0);
        for r in 1..=t.p {
            e *= step;
            if r % 64 == 0 {
                let (s, c) = libm::sincos(2.0 * PI * time * r as f64);
                e = Complex64::new(c, s);
            }
            let (x, y) = (t.xv(j, r), t.yv(j, r));
            b += (x * (e.re - 1.0) + y * e.im) / r as f64;
            db += -x * e.im + y * e.re;
        }
        w[j] = time * t.w1[j] + b / (SQRT_2 * PI);
        dw[j] = t.w1[j] + SQRT_2 * db;
    }
}

/// Iterated integrals of the smooth truncated path by composite Simpson quadrature.
///
/// The path `W_t = tW_1 + bridge(t)` is evaluated on `2·nsteps + 1` points.
/// Running double integrals use Simpson's rule on each cell with its
/// midpoint; outer integrals use the composite rule on the cell endpoints.
pub fn quadrature_oracle(t: &Tableau, nsteps: usize) -> Result<IntegralSet> {
    if nsteps < 4 || nsteps % 2 != 0 {
        return Err(Error::domain("nsteps must be even and at least 4"));
    }
    let q = t.q;
    let npts = 2 * nsteps + 1;
    let mut w = vec![0.0; npts * q];
    let mut v = vec![0.0; npts * q];
    for i in 0..npts {
        let time = i as f64 / (2 * nsteps) as f64;
        path_and_velocity(t, time, &mut w[i * q..(i + 1) * q], &mut v[i * q..(i + 1) * q]);
    }
    let h = 1.0 / nsteps as f64;
    // Running I2 at cell endpoints.
    let mut i2_run = vec![0.0; (nsteps + 1) * q * q];
    for c in 0..nsteps {
        let (a, m, b) = (2 * c, 2 * c + 1, 2 * c + 2);
        for j in 0..q {
            for k in 0..q {
                let f = |i: usize| w[i * q + j] * v[i * q + k];
                let inc = h / 6.0 * (f(a) + 4.0 * f(m) + f(b));
                i2_run[(c + 1) * q * q + j * q + k] = i2_run[c * q * q + j * q + k] + inc;
            }
        }
    }
    let simpson_nodes = |g: &dyn Fn(usize) -> f64| -> f64 {
        let mut acc = g(0) + g(nsteps);
        for i in 1..nsteps {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i);
        }
        acc * h / 3.0
    };
    let mut out = IntegralSet::identity(q);
    out.h = 1.0;
    out.convention = Convention::Stratonovich;
    let last = 2 * nsteps;
    for j in 0..q {
        out.dw[j] = w[last * q + j];
        let mut acc = 0.0;
        let mut acc_t = 0.0;
        for c in 0..nsteps {
            let (a, m, b) = (2 * c, 2 * c + 1, 2 * c + 2);
            acc += h / 6.0 * (w[a * q + j] + 4.0 * w[m * q + j] + w[b * q + j]);
            let tt = |i: usize| i as f64 / (2 * nsteps) as f64;
            acc_t += h / 6.0 * (tt(a) * v[a * q + j] + 4.0 * tt(m) * v[m * q + j] + tt(b) * v[b * q + j]);
        }
        out.int_w_dt[j] = acc;
        out.int_t_dw[j] = acc_t;
        for k in 0..q {
            out.i2[j * q + k] = i2_run[nsteps * q * q + j * q + k];
            for l in 0..q {
                let g = |i: usize| i2_run[i * q * q + j * q + k] * v[2 * i * q + l];
                out.i3[(j * q + k) * q + l] = simpson_nodes(&g);
            }
        }
    }
    Ok(out)
}

