use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An autonomous Itô SDE `dX = b(X) dt + Σ_j σ_j(X) dW^j` in `ℝ^d` driven by
/// `q` independent Wiener processes.
///
/// Array layouts (all row-major):
///
/// * `diffusion`: `d×q`, entry `σ_{ij}` at `i·q + j`;
/// * `drift_jacobian`: `∂_m b_i` at `i·d + m`;
/// * `drift_hessian`: `∂_m ∂_n b_i` at `(i·d + m)·d + n`;
/// * `diffusion_jacobian`: `∂_m σ_{ij}` at `(i·q + j)·d + m`;
/// * `diffusion_hessian`: `∂_m ∂_n σ_{ij}` at `((i·q + j)·d + m)·d + n`.
pub trait SdeProblem: Sync {
    fn name(&self) -> &str;
    /// State dimension `d`.
    fn dim(&self) -> usize;
    /// Driver dimension `q`.
    fn noise_dim(&self) -> usize;
    fn drift(&self, x: &[f64], out: &mut [f64]);
    fn diffusion(&self, x: &[f64], out: &mut [f64]);
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]);
    fn diffusion_jacobian(&self, x: &[f64], out: &mut [f64]);
    fn drift_hessian(&self, x: &[f64], out: &mut [f64]);
    fn diffusion_hessian(&self, x: &[f64], out: &mut [f64]);
    /// `X_t` given `X_0` and `W_t`, when the solution is a function of them.
    fn exact_solution(&self, _x0: &[f64], _t: f64, _w: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Affine coefficients `b(x) = A x + a` and `σ_j(x) = B_j x + c_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSde {
    pub name: String,
    pub d: usize,
    pub q: usize,
    /// `d×d` row-major.
    pub a: Vec<f64>,
    pub a0: Vec<f64>,
    /// `q` matrices `B_j`, each `d×d` row-major.
    pub b: Vec<Vec<f64>>,
    /// `q` vectors `c_j`.
    pub c: Vec<Vec<f64>>,
}

impl LinearSde {
    /// Validated constructor.
    pub fn new(name: &str, d: usize, a: Vec<f64>, a0: Vec<f64>, b: Vec<Vec<f64>>, c: Vec<Vec<f64>>) -> Result<Self> {
        let q = b.len();
        if d == 0 || q == 0 || c.len() != q {
            return Err(Error::domain("linear SDE needs d >= 1 and matching B_j, c_j lists"));
        }
        if a.len() != d * d || a0.len() != d || b.iter().any(|m| m.len() != d * d) || c.iter().any(|v| v.len() != d) {
            return Err(Error::contract("linear SDE coefficient shapes are inconsistent"));
        }
        Ok(LinearSde { name: name.into(), d, q, a, a0, b, c })
    }

    /// Scalar multiplicative noise `dX = μX dt + σX dW`.
    pub fn scalar(name: &str, mu: f64, sigma: f64) -> Self {
        LinearSde::new(name, 1, vec![mu], vec![0.0], vec![vec![sigma]], vec![vec![0.0]]).expect("valid shapes")
    }

    fn is_scalar_multiplicative(&self) -> bool {
        self.d == 1 && self.q == 1 && self.a0[0] == 0.0 && self.c[0][0] == 0.0
    }
}

impl SdeProblem for LinearSde {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn noise_dim(&self) -> usize {
        self.q
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        for i in 0..d {
            out[i] = self.a0[i] + (0..d).map(|m| self.a[i * d + m] * x[m]).sum::<f64>();
        }
    }

    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        let (d, q) = (self.d, self.q);
        for i in 0..d {
            for j in 0..q {
                out[i * q + j] = self.c[j][i] + (0..d).map(|m| self.b[j][i * d + m] * x[m]).sum::<f64>();
            }
        }
    }

    fn drift_jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a);
    }

    fn diffusion_jacobian(&self, _x: &[f64], out: &mut [f64]) {
        let (d, q) = (self.d, self.q);
        for i in 0..d {
            for j in 0..q {
                for m in 0..d {
                    out[(i * q + j) * d + m] = self.b[j][i * d + m];
                }
            }
        }
    }

    fn drift_hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }

    fn diffusion_hessian(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }

    fn exact_solution(&self, x0: &[f64], t: f64, w: &[f64]) -> Option<Vec<f64>> {
        if self.is_scalar_multiplicative() {
            let (mu, s) = (self.a[0], self.b[0][0]);
            return Some(vec![x0[0] * libm::exp((mu - 0.5 * s * s) * t + s * w[0])]);
        }
        let noiseless = self.b.iter().all(|m| m.iter().all(|&v| v == 0.0)) && self.c.iter().all(|v| v.iter().all(|&e| e == 0.0));
        if noiseless && self.d == 1 && self.a0[0] == 0.0 {
            return Some(vec![x0[0] * libm::exp(self.a[0] * t)]);
        }
        None
    }
}

/// Geometric Brownian motion `dX = 0.5 X dt + X dW`.
pub fn gbm() -> LinearSde {
    LinearSde::scalar("gbm", 0.5, 1.0)
}

/// Scalar linear SDE `dX = −0.5 X dt + 0.8 X dW` used for the order-1.5 check.
pub fn linear1d() -> LinearSde {
    LinearSde::scalar("linear1d", -0.5, 0.8)
}

/// Two-dimensional bilinear SDE with non-commuting noise matrices:
/// `dX = A X dt + B_1 X dW^1 + B_2 X dW^2`, `B_1 B_2 ≠ B_2 B_1`.
pub fn bilinear2d() -> LinearSde {
    LinearSde::new(
        "bilinear2d",
        2,
        vec![-0.5, 0.2, -0.1, -0.3],
        vec![0.0, 0.0],
        vec![vec![0.3, 0.5, 0.0, 0.2], vec![0.1, 0.0, -0.4, 0.3]],
        vec![vec![0.0, 0.0], vec![0.0, 0.0]],
    )
    .expect("valid shapes")
}

/// Looks up one of the named test problems.
pub fn problem_by_name(name: &str) -> Result<LinearSde> {
    match name {
        "gbm" => Ok(gbm()),
        "linear1d" => Ok(linear1d()),
        "bilinear2d" => Ok(bilinear2d()),
        other => Err(Error::domain(alloc::format!("unknown problem `{other}`"))),
    }
}
