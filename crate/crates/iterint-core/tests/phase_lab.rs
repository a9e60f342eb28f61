use iterint_core::fourier_tableau::*;
use iterint_core::lyndon::{dimension, IndexLayout};
use iterint_core::phase_lab::*;
use iterint_core::rng::{channel, tag, NormalStream};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn gaussians(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    NormalStream::new(seed, stream, channel(tag::AUX, 0), 0).fill(&mut v);
    v
}

fn random_omega(q: usize, seed: u64, stream: u64) -> Omega {
    Omega::from_flat(q, &gaussians(seed, stream, dimension(q))).unwrap()
}

fn random_point(q: usize, p: usize, seed: u64, stream: u64) -> Vec<f64> {
    phase_point(&sample_tableau(q, p, seed, stream).unwrap())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn phase_vanishes_at_origin() {
    for q in 1..4 {
        let w = random_omega(q, 1, q as u64);
        assert_eq!(phase_value(&vec![0.0; 2 * q * 5], &w).unwrap(), 0.0);
    }
}

#[test]
fn unit_coordinate_recovers_z() {
    let q = 3;
    let layout = IndexLayout::new(q).unwrap();
    let t = sample_tableau(q, 7, 2, 2).unwrap();
    let s = partial_sums(&t);
    for j in 0..q {
        let w = Omega::unit(q, layout.z + j).unwrap();
        let v = phase_value(&phase_point(&t), &w).unwrap();
        assert!((v - s.z[j]).abs() < 1e-14);
    }
}

#[test]
fn phase_equals_pairing_with_partial_sums() {
    for i in 0..100u64 {
        let q = 1 + (i % 3) as usize;
        let p = 1 + (i % 11) as usize;
        let w = random_omega(q, 3, i);
        let t = sample_tableau(q, p, 4, i).unwrap();
        let flat = partial_sums(&t).flatten();
        let pairing: f64 = flat.iter().zip(w.flatten()).map(|(a, b)| a * b).sum();
        let phase = phase_value(&phase_point(&t), &w).unwrap();
        let scale = flat.iter().zip(w.flatten()).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1e-300);
        assert!((phase - pairing).abs() <= 1e-10 * scale, "i={i}: {phase} vs {pairing}");
    }
}

#[test]
fn omega_extension_rules() {
    let q = 3;
    let w = random_omega(q, 5, 5);
    for j in 0..q {
        for k in 0..q {
            assert_eq!(w.alpha_at(j, k), -w.alpha_at(k, j));
            assert_eq!(w.beta1_at(j, k), w.beta1_at(k, j));
            assert_eq!(w.beta2_at(j, k), w.beta2_at(k, j));
            if j >= k {
                assert_eq!(w.gamma_at(j, k), 0.0);
            }
            for l in 0..q {
                let word = iterint_core::lyndon::Word3::new(j + 1, k + 1, l + 1);
                if !iterint_core::lyndon::is_lyndon3_unchecked(word) {
                    assert_eq!(w.rho_at(j, k, l), 0.0);
                } else {
                    assert_ne!(w.rho_at(j, k, l), 0.0);
                }
            }
        }
    }
    assert_eq!(w.flatten().len(), dimension(q));
    assert!(Omega::from_flat(q, &[0.0; 3]).is_err());
    assert!(phase_value(&[0.0; 5], &w).is_err());
}

#[test]
fn gradient_at_origin_is_the_linear_part() {
    let (q, p) = (2, 6);
    let w = random_omega(q, 6, 6);
    let g = phase_gradient(&vec![0.0; 2 * q * p], &w).unwrap();
    for j in 0..q {
        for r in 1..=p {
            let rf = r as f64;
            assert!((g[x_index(q, p, j, r)] - w.a[j] / rf).abs() < 1e-15);
            assert!((g[y_index(q, p, j, r)] - w.b[j] / (rf * rf)).abs() < 1e-15);
        }
    }
}

fn fd_gradient(poly: &PhasePolynomial, v: &[f64], h: f64) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let (mut a, mut b) = (v.to_vec(), v.to_vec());
            a[i] += h;
            b[i] -= h;
            (poly.value(&a).unwrap() - poly.value(&b).unwrap()) / (2.0 * h)
        })
        .collect()
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    let h = 1e-4;
    for (q, p) in [(1, 4), (2, 8), (3, 6)] {
        for i in 0..20u64 {
            let w = random_omega(q, 7, i);
            let v = random_point(q, p, 8, i);
            let poly = PhasePolynomial::new(p, &w).unwrap();
            let g = poly.gradient(&v).unwrap();
            let fd = fd_gradient(&poly, &v, h);
            let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(num <= 1e-5 * den, "gradient q={q} p={p} i={i}: {num} / {den}");

            let hs = poly.hessian(&v).unwrap();
            for c in 0..v.len() {
                let (mut a, mut b) = (v.clone(), v.clone());
                a[c] += h;
                b[c] -= h;
                let (ga, gb) = (poly.gradient(&a).unwrap(), poly.gradient(&b).unwrap());
                for r in 0..v.len() {
                    let fdh = (ga[r] - gb[r]) / (2.0 * h);
                    assert!((fdh - hs[(r, c)]).abs() <= 1e-4, "hessian q={q} p={p} ({r},{c})");
                }
            }
        }
    }
}

#[test]
fn gradient_is_affine_without_cubic_terms() {
    let (q, p) = (3, 6);
    let mut w = random_omega(q, 9, 9);
    w.rho.iter_mut().for_each(|x| *x = 0.0);
    w.gamma.iter_mut().for_each(|x| *x = 0.0);
    let v = random_point(q, p, 10, 10);
    let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
    let (g0, g1, g2) = (
        phase_gradient(&vec![0.0; v.len()], &w).unwrap(),
        phase_gradient(&v, &w).unwrap(),
        phase_gradient(&v2, &w).unwrap(),
    );
    for i in 0..v.len() {
        assert!(((g2[i] - g0[i]) - 2.0 * (g1[i] - g0[i])).abs() < 1e-10);
    }
}

#[test]
fn hessian_structure() {
    let (q, p) = (2, 7);
    let w = random_omega(q, 11, 11);
    let v = random_point(q, p, 12, 12);
    let h = phase_hessian(&v, &w).unwrap();
    assert_eq!(h.nrows(), 2 * q * p);
    assert!((&h - h.transpose()).amax() < 1e-12);

    let mut flat = w.clone();
    flat.rho.iter_mut().for_each(|x| *x = 0.0);
    let h1 = phase_hessian(&v, &flat).unwrap();
    let h2 = phase_hessian(&random_point(q, p, 13, 13), &flat).unwrap();
    assert!((&h1 - &h2).amax() < 1e-15);
    // Diagonal of the x-block: (1 + δ_jk) β1_jk / r².
    for j in 0..q {
        for r in 1..=p {
            let i = x_index(q, p, j, r);
            assert!((h1[(i, i)] - 2.0 * flat.beta1_at(j, j) / (r * r) as f64).abs() < 1e-14);
        }
    }
    // x_{jr} y_{kr}: α_jk / r.
    let (i, k) = (x_index(q, p, 0, 3), y_index(q, p, 1, 3));
    assert!((h1[(i, k)] - flat.alpha_at(0, 1) / 3.0).abs() < 1e-15);
}

#[test]
fn pure_cubic_hessian_is_linear() {
    let (q, p) = (3, 6);
    let mut w = Omega::zeros(q).unwrap();
    w.rho = gaussians(14, 14, w.rho.len());
    let v = random_point(q, p, 15, 15);
    let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
    let (h1, h2) = (phase_hessian(&v, &w).unwrap(), phase_hessian(&v2, &w).unwrap());
    assert!((h2 - h1 * 2.0).amax() < 1e-10);
}

#[test]
fn skew_matrix_examples() {
    let s1 = skew_matrix(1).unwrap();
    assert_eq!(s1.entries, vec![BigRational::zero()]);
    let s2 = skew_matrix(2).unwrap();
    assert_eq!(*s2.get(1, 2), rat(1, 3));
    assert_eq!(*s2.get(2, 1), rat(-1, 3));
    let s5 = skew_matrix(5).unwrap();
    assert_eq!(*s5.get(1, 3), rat(1, 8));
    for r in 1..=5 {
        for s in 1..=5 {
            assert_eq!(s5.get(r, s), &-s5.get(s, r).clone());
        }
    }
    assert!(skew_matrix(0).is_err());
}

/// Leibniz expansion over all permutations.
fn leibniz_det(n: usize) -> BigRational {
    let m = skew_matrix(n).unwrap();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = BigRational::zero();
    fn rec(k: usize, perm: &mut Vec<usize>, sign: i64, m: &SkewMatrixN, total: &mut BigRational) {
        let n = perm.len();
        if k == n {
            let mut prod = BigRational::from_integer(BigInt::from(sign));
            for (r, &c) in perm.iter().enumerate() {
                prod *= m.get(r + 1, c + 1);
            }
            *total += prod;
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            rec(k + 1, perm, if i == k { sign } else { -sign }, m, total);
            perm.swap(k, i);
        }
    }
    rec(0, &mut perm, 1, &m, &mut total);
    total
}

#[test]
fn thorn_small_cases() {
    assert_eq!(thorn(2).unwrap(), rat(1, 9));
    let pf4 = rat(1, 21) - rat(1, 96) + rat(1, 75);
    assert_eq!(pf4, rat(283, 5600));
    assert_eq!(thorn(4).unwrap(), rat(80089, 31_360_000));
    for n in 1..=7 {
        assert_eq!(thorn(n).unwrap(), leibniz_det(n), "n={n}");
    }
    for n in [1, 3, 5, 9, 15, 27] {
        assert!(thorn(n).unwrap().is_zero());
    }
    assert!(thorn(0).is_err());
}

#[test]
fn pfaffian_and_elimination_agree() {
    for n in (2..=24).step_by(2) {
        assert_eq!(thorn_pfaffian(n).unwrap(), thorn_bareiss(n).unwrap(), "n={n}");
    }
    assert!(thorn_bareiss(3).unwrap().is_zero());
}

#[test]
fn thorn_decays_roughly_exponentially() {
    let ns = [2usize, 4, 6, 10, 12, 16, 18, 22, 28, 30, 36, 40];
    let logs: Vec<f64> = ns.iter().map(|&n| log_abs(&thorn(n).unwrap())).collect();
    assert!(logs.iter().all(|l| l.is_finite()));
    let slopes: Vec<f64> = (1..ns.len()).map(|i| (logs[i] - logs[i - 1]) / (ns[i] - ns[i - 1]) as f64).collect();
    assert!(slopes.iter().all(|&s| s < 0.0));
    let (lo, hi) = slopes.iter().fold((f64::MAX, 0.0f64), |(a, b), s| (a.min(s.abs()), b.max(s.abs())));
    assert!(hi / lo <= 3.0, "slopes {slopes:?}");
}

#[test]
fn log_and_approx_of_rationals() {
    let r = rat(-3, 7);
    assert!((approx_f64(&r) + 3.0 / 7.0).abs() < 1e-15);
    assert_eq!(log_abs(&BigRational::zero()), f64::NEG_INFINITY);
    let big = BigRational::new(BigInt::one(), BigInt::from(10).pow(400));
    assert!((log_abs(&big) + 400.0 * std::f64::consts::LN_10).abs() < 1e-9);
    assert_eq!(approx_f64(&big), 0.0);
}

#[test]
fn charfn_basics() {
    let q = 2;
    let zero = vec![0.0; dimension(q)];
    let e = charfn_estimate(q, 8, &zero, 1000, 1).unwrap();
    assert_eq!((e.re, e.im, e.se), (1.0, 0.0, 0.0));
    assert!(charfn_estimate(q, 8, &zero, 999, 1).is_err());
    assert!(charfn_estimate(q, 8, &[0.0; 2], 1000, 1).is_err());
    for (i, r) in [0.5, 2.0, 8.0].into_iter().enumerate() {
        let dir = iterint_core::rng::unit_vector(3, i as u64, channel(tag::DIRECTION, 0), dimension(q));
        let xi: Vec<f64> = dir.iter().map(|x| x * r).collect();
        let e = charfn_estimate(q, 8, &xi, 2000, 4).unwrap();
        assert!(e.modulus() <= 1.0 + 3.0 * e.se);
        assert!(e.se > 0.0);
    }
}

#[test]
fn charfn_matches_gaussian_z_marginal() {
    // ⟨ξ, V_p⟩ = t z_1 with z_1 ~ N(0, Σ_{r≤p} 1/r²) has ψ = exp(−t² σ²/2).
    let (q, p) = (2, 8);
    let mut xi = vec![0.0; dimension(q)];
    xi[0] = 1.3;
    let sigma2: f64 = (1..=p).map(|r| 1.0 / (r * r) as f64).sum();
    let e = charfn_estimate(q, p, &xi, 20_000, 5).unwrap();
    let exact = (-0.5 * 1.3f64.powi(2) * sigma2).exp();
    assert!((e.re - exact).abs() < 4.0 * e.se && e.im.abs() < 4.0 * e.se, "{e:?} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phase_is_linear_in_omega(seed in 0u64..10_000, p in 1usize..8, q in 1usize..4, c in -3.0f64..3.0) {
        let w1 = random_omega(q, seed, 1);
        let w2 = random_omega(q, seed, 2);
        let comb = Omega::from_flat(q, &w1.flatten().iter().zip(w2.flatten()).map(|(a, b)| a + c * b).collect::<Vec<_>>()).unwrap();
        let v = random_point(q, p, seed, 3);
        let lhs = phase_value(&v, &comb).unwrap();
        let rhs = phase_value(&v, &w1).unwrap() + c * phase_value(&v, &w2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn hessian_is_symmetric(seed in 0u64..10_000, p in 1usize..7, q in 1usize..4) {
        let h = phase_hessian(&random_point(q, p, seed, 4), &random_omega(q, seed, 5)).unwrap();
        prop_assert!((&h - h.transpose()).amax() <= 1e-12);
    }
}
