//! Gaussian coefficient tableaus, truncated Fourier partial sums `V_p`,
//! tails `Ṽ_{p,N} = V_N − V_p` and the conditional moments of the tail.

mod conditional;
pub mod convolve;
pub mod literal;
pub(crate) mod sums;
mod tableau;

use serde::{Deserialize, Serialize};

pub use conditional::{
    conditional_tail_covariance, conditional_tail_mean, conditional_tail_mean_truncated,
    zeta2_tail, CovarianceMethod, TailCovarianceTables,
};
pub use convolve::{Convolver, DirectConvolver};
pub use sums::{
    delta_tensor, delta_values, nu_pair, partial_sums, partial_sums_with, DeltaTensor,
    PartialSums,
};
pub use tableau::{sample_tableau, Tableau, TABLEAU_MAGIC, TABLEAU_VERSION};

use crate::error::{Error, Result};

/// The tail `Ṽ_{p,N} = V_N − V_p` with the block structure of [`PartialSums`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSums {
    pub p: usize,
    pub n: usize,
    pub sums: PartialSums,
}

/// Tail of an already extended tableau: `V_N − V_p` where `N = t.p`.
pub fn tail_of_extended<C: Convolver + ?Sized>(t: &Tableau, p: usize, conv: &mut C) -> Result<TailSums> {
    if p == 0 || t.p <= p {
        return Err(Error::domain("tail requires 1 <= p < N"));
    }
    let full = partial_sums_with(t, conv);
    let head = partial_sums_with(&t.truncate(p)?, conv);
    let mut sums = full.sub(&head);
    sums.p = t.p;
    Ok(TailSums { p, n: t.p, sums })
}

/// Extends `t` to `n` modes along its own stream and returns `V_N − V_p`.
pub fn tail_sample(t: &Tableau, n: usize) -> Result<TailSums> {
    tail_sample_with(t, n, &mut DirectConvolver)
}

/// [`tail_sample`] with an explicit convolution backend.
pub fn tail_sample_with<C: Convolver + ?Sized>(t: &Tableau, n: usize, conv: &mut C) -> Result<TailSums> {
    if n <= t.p {
        return Err(Error::domain("tail_sample requires N > p"));
    }
    let ext = t.extend_to(n)?;
    tail_of_extended(&ext, t.p, conv)
}

/// Tail computed term by term over the region `max(r,s) > p` (ν) and
/// `r + s > p` (Δ); the remaining blocks are single sums over `p < r <= N`.
pub fn tail_literal(t: &Tableau, p: usize) -> Result<TailSums> {
    if p == 0 || t.p <= p {
        return Err(Error::domain("tail requires 1 <= p < N"));
    }
    let n = t.p;
    let q = t.q;
    let mut s = PartialSums::zeros(q, n);
    for j in 0..q {
        for r in p + 1..=n {
            let w = 1.0 / r as f64;
            s.z[j] += t.xv(j, r) * w;
            s.u[j] += t.yv(j, r) * w * w;
        }
        for k in j..q {
            let (mut m1, mut m2, mut la) = (0.0, 0.0, 0.0);
            for r in p + 1..=n {
                let w = 1.0 / r as f64;
                m1 += t.xv(j, r) * t.xv(k, r) * w * w;
                m2 += t.yv(j, r) * t.yv(k, r) * w * w;
                la += (t.xv(j, r) * t.yv(k, r) - t.yv(j, r) * t.xv(k, r)) * w;
            }
            s.mu1[sums::upper_index(q, j, k)] = m1;
            s.mu2[sums::upper_index(q, j, k)] = m2;
            if j < k {
                s.lambda[sums::strict_index(q, j, k)] = la;
                s.nu[sums::strict_index(q, j, k)] =
                    literal::nu_literal(t, j, k, literal::Region::Tail { p, n });
            }
        }
    }
    let words = crate::lyndon::enumerate_lyndon3(q)?;
    for (i, w) in words.iter().enumerate() {
        let (j, k, l) = w.zero_based();
        s.delta[i] = literal::delta_literal(t, j, k, l, literal::Region::Tail { p, n });
    }
    Ok(TailSums { p, n, sums: s })
}
