//! Strong one-step integrators for Itô SDEs driven by iterated-integral
//! sets, test problems, and the path-level machinery of strong-error scans.
//!
//! Every scheme consumes one [`IntegralSet`] per step in Itô convention over
//! the step interval `[t_k, t_k + h]`:
//!
//! ```text
//! Euler      X + b h + σ ΔW
//! Milstein   Euler + Σ_{j,l} ς_{·jl} I_(j,l),            ς_{ijl} = Σ_m σ_{mj} ∂_m σ_{il}
//! Taylor 1.5 Milstein + ½ L⁰b h² + Σ_j (L⁰σ_j I_(0,j) + L^j b I_(j,0))
//!                     + Σ_{j,k,l} L^j L^k σ_l I_(j,k,l)
//! ```
//!
//! with `L⁰ = Σ b_m ∂_m + ½ Σ (σσᵀ)_{mn} ∂_m∂_n`, `L^j = Σ σ_{mj} ∂_m`,
//! `I_(j,l)` the double Itô integral with `j` innermost, `I_(0,j) = ∫ (s − t_k) dW^j`
//! and `I_(j,0) = ∫ (W^j_s − W^j_{t_k}) ds`.

mod driver;
mod problem;

pub use driver::{
    coarsen, complete_mixed_integrals, path_squared_errors, strong_error_report, FourierDriver, Reference,
    ScanConfig, DEFAULT_DRIVER_MODES, DEFAULT_REFINEMENT_LEVELS,
};
pub use problem::{bilinear2d, gbm, linear1d, problem_by_name, LinearSde, SdeProblem};

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::{Convention, IntegralSet};

/// Integrator selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Euler,
    Milstein,
    Taylor15,
}

impl SchemeKind {
    /// Parses `euler`, `milstein` or `taylor15`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "euler" => Ok(SchemeKind::Euler),
            "milstein" => Ok(SchemeKind::Milstein),
            "taylor15" => Ok(SchemeKind::Taylor15),
            other => Err(Error::domain(alloc::format!("unknown scheme `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Euler => "euler",
            SchemeKind::Milstein => "milstein",
            SchemeKind::Taylor15 => "taylor15",
        }
    }
}

/// A completed run: states at `t_0 = 0, h, …, T` and the sets that drove it.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub scheme: SchemeKind,
    pub h: f64,
    pub states: Vec<Vec<f64>>,
    pub driver: Vec<IntegralSet>,
    pub seed: u64,
}

/// Number of steps of size `h` in `[0, t_end]`; `h` must divide `t_end`.
pub fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0 && t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain("step size and horizon must be positive"));
    }
    let n = libm::round(t_end / h);
    if n < 1.0 || libm::fabs(n * h - t_end) > 1e-12 * t_end {
        return Err(Error::domain(alloc::format!("h = {h} does not divide T = {t_end}")));
    }
    Ok(n as usize)
}

/// Scratch space holding the coefficient fields at one state.
struct Fields {
    b: Vec<f64>,
    sig: Vec<f64>,
    jb: Vec<f64>,
    js: Vec<f64>,
    hb: Vec<f64>,
    hs: Vec<f64>,
}

impl Fields {
    fn new(d: usize, q: usize) -> Self {
        Fields {
            b: vec![0.0; d],
            sig: vec![0.0; d * q],
            jb: vec![0.0; d * d],
            js: vec![0.0; d * q * d],
            hb: vec![0.0; d * d * d],
            hs: vec![0.0; d * q * d * d],
        }
    }
}

fn check_set<P: SdeProblem + ?Sized>(problem: &P, kind: SchemeKind, set: &IntegralSet) -> Result<()> {
    let q = problem.noise_dim();
    if set.q != q || set.dw.len() != q {
        return Err(Error::contract("integral set dimension differs from the driver dimension"));
    }
    if kind == SchemeKind::Euler {
        return Ok(());
    }
    if set.convention != Convention::Ito {
        return Err(Error::contract("Milstein-type schemes need Itô integrals"));
    }
    if set.i2.len() != q * q {
        return Err(Error::contract("missing level-2 integrals"));
    }
    if kind == SchemeKind::Taylor15 && (set.i3.len() != q * q * q || set.int_w_dt.len() != q || set.int_t_dw.len() != q) {
        return Err(Error::contract("missing level-3 or mixed time integrals"));
    }
    Ok(())
}

/// Advances `x` by one step of `kind` driven by `set`.
pub fn step<P: SdeProblem + ?Sized>(problem: &P, kind: SchemeKind, x: &[f64], set: &IntegralSet) -> Result<Vec<f64>> {
    check_set(problem, kind, set)?;
    let mut f = Fields::new(problem.dim(), problem.noise_dim());
    Ok(step_unchecked(problem, kind, x, set, &mut f))
}

fn step_unchecked<P: SdeProblem + ?Sized>(
    problem: &P,
    kind: SchemeKind,
    x: &[f64],
    set: &IntegralSet,
    f: &mut Fields,
) -> Vec<f64> {
    let (d, q) = (problem.dim(), problem.noise_dim());
    let h = set.h;
    problem.drift(x, &mut f.b);
    problem.diffusion(x, &mut f.sig);
    let mut out: Vec<f64> = (0..d)
        .map(|i| x[i] + f.b[i] * h + (0..q).map(|j| f.sig[i * q + j] * set.dw[j]).sum::<f64>())
        .collect();
    if kind == SchemeKind::Euler {
        return out;
    }
    problem.diffusion_jacobian(x, &mut f.js);
    let js = |i: usize, j: usize, m: usize| f.js[(i * q + j) * d + m];
    let sig = |m: usize, j: usize| f.sig[m * q + j];
    for i in 0..d {
        for j in 0..q {
            for l in 0..q {
                let vs: f64 = (0..d).map(|m| sig(m, j) * js(i, l, m)).sum();
                out[i] += vs * set.i2[j * q + l];
            }
        }
    }
    if kind == SchemeKind::Milstein {
        return out;
    }
    problem.drift_jacobian(x, &mut f.jb);
    problem.drift_hessian(x, &mut f.hb);
    problem.diffusion_hessian(x, &mut f.hs);
    let jb = |i: usize, m: usize| f.jb[i * d + m];
    let hb = |i: usize, m: usize, n: usize| f.hb[(i * d + m) * d + n];
    let hs = |i: usize, j: usize, m: usize, n: usize| f.hs[((i * q + j) * d + m) * d + n];
    // (σσᵀ)_{mn}
    let mut ss = vec![0.0; d * d];
    for m in 0..d {
        for n in 0..d {
            ss[m * d + n] = (0..q).map(|j| sig(m, j) * sig(n, j)).sum();
        }
    }
    for i in 0..d {
        let l0b: f64 = (0..d).map(|m| f.b[m] * jb(i, m)).sum::<f64>()
            + 0.5 * (0..d).flat_map(|m| (0..d).map(move |n| (m, n))).map(|(m, n)| ss[m * d + n] * hb(i, m, n)).sum::<f64>();
        out[i] += 0.5 * l0b * h * h;
        for j in 0..q {
            let l0s: f64 = (0..d).map(|m| f.b[m] * js(i, j, m)).sum::<f64>()
                + 0.5
                    * (0..d)
                        .flat_map(|m| (0..d).map(move |n| (m, n)))
                        .map(|(m, n)| ss[m * d + n] * hs(i, j, m, n))
                        .sum::<f64>();
            let ljb: f64 = (0..d).map(|m| sig(m, j) * jb(i, m)).sum();
            out[i] += l0s * set.int_t_dw[j] + ljb * set.int_w_dt[j];
        }
        for j in 0..q {
            for k in 0..q {
                for l in 0..q {
                    let mut c = 0.0;
                    for m in 0..d {
                        let mut inner = 0.0;
                        for n in 0..d {
                            inner += js(n, k, m) * js(i, l, n) + sig(n, k) * hs(i, l, m, n);
                        }
                        c += sig(m, j) * inner;
                    }
                    out[i] += c * set.i3[(j * q + k) * q + l];
                }
            }
        }
    }
    out
}

fn run<P: SdeProblem + ?Sized>(
    problem: &P,
    kind: SchemeKind,
    x0: &[f64],
    t_end: f64,
    h: f64,
    driver: &[IntegralSet],
    seed: u64,
) -> Result<SchemeRun> {
    let n = step_count(t_end, h)?;
    if x0.len() != problem.dim() {
        return Err(Error::contract("initial state has the wrong dimension"));
    }
    if driver.len() != n {
        return Err(Error::contract(alloc::format!("driver supplies {} steps but {n} are needed", driver.len())));
    }
    for set in driver {
        if libm::fabs(set.h - h) > 1e-12 * h {
            return Err(Error::contract("driver step length differs from h"));
        }
        check_set(problem, kind, set)?;
    }
    let mut f = Fields::new(problem.dim(), problem.noise_dim());
    let mut states = Vec::with_capacity(n + 1);
    states.push(x0.to_vec());
    for set in driver {
        let next = step_unchecked(problem, kind, states.last().expect("non-empty"), set, &mut f);
        states.push(next);
    }
    Ok(SchemeRun { scheme: kind, h, states, driver: driver.to_vec(), seed })
}

/// Euler-Maruyama over `[0, T]`.
pub fn euler<P: SdeProblem + ?Sized>(problem: &P, x0: &[f64], t_end: f64, h: f64, driver: &[IntegralSet]) -> Result<SchemeRun> {
    run(problem, SchemeKind::Euler, x0, t_end, h, driver, 0)
}

/// Milstein over `[0, T]`; the driver must carry Itô level-2 integrals.
pub fn milstein<P: SdeProblem + ?Sized>(problem: &P, x0: &[f64], t_end: f64, h: f64, driver: &[IntegralSet]) -> Result<SchemeRun> {
    run(problem, SchemeKind::Milstein, x0, t_end, h, driver, 0)
}

/// Order-1.5 strong Itô-Taylor scheme over `[0, T]`; the driver must carry
/// Itô level-3 and mixed time integrals.
pub fn taylor15<P: SdeProblem + ?Sized>(problem: &P, x0: &[f64], t_end: f64, h: f64, driver: &[IntegralSet]) -> Result<SchemeRun> {
    run(problem, SchemeKind::Taylor15, x0, t_end, h, driver, 0)
}

/// Runs `kind` and records `seed` as the provenance of the driver.
pub fn run_scheme<P: SdeProblem + ?Sized>(
    problem: &P,
    kind: SchemeKind,
    x0: &[f64],
    t_end: f64,
    h: f64,
    driver: &[IntegralSet],
    seed: u64,
) -> Result<SchemeRun> {
    run(problem, kind, x0, t_end, h, driver, seed)
}

/// Runs a scheme along a driver without keeping the driver, returning states.
pub(crate) fn integrate<P: SdeProblem + ?Sized>(
    problem: &P,
    kind: SchemeKind,
    x0: &[f64],
    driver: &[IntegralSet],
) -> Vec<Vec<f64>> {
    let mut f = Fields::new(problem.dim(), problem.noise_dim());
    let mut states = Vec::with_capacity(driver.len() + 1);
    states.push(x0.to_vec());
    for set in driver {
        let next = step_unchecked(problem, kind, states.last().expect("non-empty"), set, &mut f);
        states.push(next);
    }
    states
}
