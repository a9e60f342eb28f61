//! Term-by-term evaluation of the `ν` and `Δ` series over explicit index
//! regions. These loops follow the defining formulas literally and serve as
//! independent references for the convolution-based kernels and for tails.

use super::tableau::Tableau;

/// Region of `(r, s)` pairs included in a partial or tail sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Pairs with every index `<= n` (for `Δ`: `r + s <= n`).
    Partial { n: usize },
    /// Pairs in the `n` truncation that are absent from the `p` truncation.
    Tail { p: usize, n: usize },
}

/// `ν_jk` over a region; for tails the pairs are visited by increasing `max(r, s)`.
pub fn nu_literal(t: &Tableau, j: usize, k: usize, region: Region) -> f64 {
    let (lo, n) = match region {
        Region::Partial { n } => (0, n),
        Region::Tail { p, n } => (p, n),
    };
    assert!(n <= t.p, "region exceeds tableau");
    let mut acc = 0.0;
    for m in lo + 1..=n {
        // L-shaped layer max(r, s) = m.
        for other in 1..m {
            acc += nu_term(t, j, k, m, other) + nu_term(t, j, k, other, m);
        }
    }
    acc
}

fn nu_term(t: &Tableau, j: usize, k: usize, r: usize, s: usize) -> f64 {
    let (rf, sf) = (r as f64, s as f64);
    ((rf / sf) * t.xv(j, r) * t.xv(k, s) + t.yv(j, r) * t.yv(k, s)) / (rf * rf - sf * sf)
}

/// `Δ_jkl` over a region in real form; pairs are visited by increasing `r + s`.
pub fn delta_literal(t: &Tableau, j: usize, k: usize, l: usize, region: Region) -> f64 {
    let (lo, n) = match region {
        Region::Partial { n } => (0, n),
        Region::Tail { p, n } => (p, n),
    };
    assert!(n <= t.p, "region exceeds tableau");
    let (x, y) = (|a: usize, r: usize| t.xv(a, r), |a: usize, r: usize| t.yv(a, r));
    let mut acc = 0.0;
    for m in (lo + 1).max(2)..=n {
        for r in 1..m {
            let s = m - r;
            let (rf, sf, mf) = (r as f64, s as f64, m as f64);
            let l1 = (x(j, r) * y(k, s) + y(j, r) * x(k, s)) * x(l, m)
                + (-x(j, r) * x(k, s) + y(j, r) * y(k, s)) * y(l, m);
            let l2 = (x(j, r) * y(l, s) + y(j, r) * x(l, s)) * x(k, m)
                + (-x(j, r) * x(l, s) + y(j, r) * y(l, s)) * y(k, m);
            let l3 = (x(k, r) * y(l, s) + y(k, r) * x(l, s)) * x(j, m)
                + (-x(k, r) * x(l, s) + y(k, r) * y(l, s)) * y(j, m);
            acc += -l1 / (rf * mf) + l2 / (rf * sf) - l3 / (sf * mf);
        }
    }
    acc
}
