use iterint_core::fourier_tableau::literal::{delta_literal, nu_literal, Region};
use iterint_core::fourier_tableau::*;
use iterint_core::lyndon::layout;
use iterint_core::rng::{channel, derive_stream, tag, NormalStream};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn sampling_is_deterministic_and_prefix_stable() {
    let a = sample_tableau(3, 40, 11, 5).unwrap();
    let b = sample_tableau(3, 40, 11, 5).unwrap();
    assert_eq!(a, b);
    let short = sample_tableau(3, 17, 11, 5).unwrap();
    assert_eq!(a.truncate(17).unwrap(), short);
    assert_eq!(short.extend_to(40).unwrap(), a);
    assert!(a.is_finite());
    assert!(sample_tableau(0, 3, 0, 0).is_err());
    assert!(sample_tableau(2, 0, 0, 0).is_err());
}

#[test]
fn first_coefficient_has_zero_mean() {
    let n = 100_000;
    let mut s = 0.0;
    for i in 0..n {
        s += sample_tableau(1, 16, 42, i).unwrap().x[0];
    }
    let mean = s / n as f64;
    assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
}

#[test]
fn streams_are_uncorrelated() {
    let n = 100_000u64;
    let (mut sxy, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let idx = (i % 64) as usize;
        let a = sample_tableau(2, 64, i / 64, 0).unwrap();
        let b = sample_tableau(2, 64, i / 64, 1).unwrap();
        let (u, v) = (a.x[idx], b.x[idx]);
        sxy += u * v;
        sx += u;
        sy += v;
        sxx += u * u;
        syy += v * v;
    }
    let nf = n as f64;
    let cov = sxy / nf - sx / nf * sy / nf;
    let corr = cov / ((sxx / nf) * (syy / nf)).sqrt();
    assert!(corr.abs() < 3.0 / nf.sqrt(), "corr {corr}");
}

#[test]
fn zero_tableau_gives_zero_sums() {
    let t = Tableau::zeros(3, 9);
    let s = partial_sums(&t);
    assert!(s.flatten().iter().all(|&v| v == 0.0));
    assert_eq!(s.flatten().len(), layout(3).unwrap().d);
}

#[test]
fn p_one_sums() {
    let t = sample_tableau(3, 1, 1, 1).unwrap();
    let s = partial_sums(&t);
    assert!(s.nu.iter().all(|&v| v == 0.0));
    assert!(s.delta.iter().all(|&v| v == 0.0));
    let l = layout(3).unwrap();
    let expect = t.xv(0, 1) * t.yv(1, 1) - t.yv(0, 1) * t.xv(1, 1);
    assert_eq!(s.lambda[l.strict_index(0, 1)], expect);
}

#[test]
fn convolution_kernels_match_literal_sums() {
    for (q, p, seed) in [(2, 9, 1), (3, 13, 2), (4, 7, 3)] {
        let t = sample_tableau(q, p, seed, 0).unwrap();
        let s = partial_sums(&t);
        let lay = layout(q).unwrap();
        for j in 0..q {
            for k in 0..q {
                if j != k {
                    let lit = nu_literal(&t, j, k, Region::Partial { n: p });
                    assert!(rel_close(s.nu_full(j, k), lit, 1e-12), "nu {j}{k}");
                    assert!(rel_close(nu_pair(&t, j, k, &mut DirectConvolver), lit, 1e-12));
                }
            }
        }
        let dt = delta_tensor(&t, &mut DirectConvolver);
        for j in 0..q {
            for k in 0..q {
                for l in 0..q {
                    let lit = delta_literal(&t, j, k, l, Region::Partial { n: p });
                    assert!(rel_close(dt.get(j, k, l), lit, 1e-12));
                }
            }
        }
        for (i, w) in lay.words.iter().enumerate() {
            let (j, k, l) = w.zero_based();
            assert_eq!(s.delta[i], dt.get(j, k, l));
        }
    }
}

#[test]
fn nu_identity_holds() {
    for p in [1, 2, 7, 64] {
        for seed in 0..20 {
            let t = sample_tableau(3, p, seed, 9).unwrap();
            let s = partial_sums(&t);
            for j in 0..3 {
                for k in j + 1..3 {
                    let direct_kj = nu_literal(&t, k, j, Region::Partial { n: p });
                    let lhs = s.nu_full(j, k) + direct_kj;
                    let rhs = s.z[j] * s.z[k] - s.mu1_full(j, k);
                    assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + (s.z[j] * s.z[k]).abs()));
                }
            }
        }
    }
}

#[test]
fn flatten_round_trip_is_exact() {
    let t = sample_tableau(3, 11, 4, 4).unwrap();
    let s = partial_sums(&t);
    let lay = layout(3).unwrap();
    let back = PartialSums::unflatten(&lay, 11, &s.flatten()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn bridge_endpoints_and_zero() {
    let t = sample_tableau(2, 50, 3, 3).unwrap();
    for v in t.bridge_eval(0.0).unwrap().into_iter().chain(t.bridge_eval(1.0).unwrap()) {
        assert!(v.abs() < 1e-12);
    }
    let z = Tableau::zeros(2, 50);
    assert!(z.bridge_eval(0.37).unwrap().iter().all(|&v| v == 0.0));
    assert!(t.bridge_eval(1.5).is_err());
    assert!(t.bridge_eval(-0.1).is_err());
}

#[test]
fn bridge_variance_at_midpoint() {
    let n = 10_000;
    let vals: Vec<f64> = (0..n).map(|i| sample_tableau(1, 256, 77, i).unwrap().bridge_eval(0.5).unwrap()[0]).collect();
    let m: f64 = vals.iter().sum::<f64>() / n as f64;
    let var: f64 = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    // Truncated variance Σ_{r odd <= 256} 2/(π² r²).
    let exact: f64 = (1..=256).filter(|r| r % 2 == 1).map(|r| 2.0 / (std::f64::consts::PI.powi(2) * (r * r) as f64)).sum();
    let m4: f64 = vals.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n as f64;
    let se = ((m4 - var * var) / n as f64).sqrt();
    assert!((var - 0.25).abs() < 3.0 * se + (0.25 - exact), "var {var} se {se}");
}

#[test]
fn lambda_variance_matches_series() {
    let n = 100_000;
    let p = 256;
    let lay = layout(2).unwrap();
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let t = sample_tableau(2, p, 5, i).unwrap();
            partial_sums(&t).lambda[lay.strict_index(0, 1)]
        })
        .collect();
    let (var, se) = var_and_se(&vals);
    let exact: f64 = 2.0 * (1..=p).map(|r| 1.0 / (r * r) as f64).sum::<f64>();
    assert!((var - exact).abs() < 3.0 * se, "var {var} exact {exact} se {se}");
}

fn var_and_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let m = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = vals.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    (var, ((m4 - var * var) / n).sqrt())
}

#[test]
fn tail_requires_larger_n() {
    let t = sample_tableau(2, 8, 1, 1).unwrap();
    assert!(tail_sample(&t, 8).is_err());
    assert!(tail_sample(&t, 3).is_err());
}

#[test]
fn single_mode_extension_tail() {
    let t = sample_tableau(2, 6, 1, 1).unwrap();
    let ext = t.with_extension(1, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
    let tail = tail_of_extended(&ext, 6, &mut DirectConvolver).unwrap();
    assert!(tail.sums.flatten().iter().all(|v| v.abs() < 1e-14));
    let ext = t.with_extension(1, &[0.7, -0.2], &[0.1, 0.4]).unwrap();
    let tail = tail_of_extended(&ext, 6, &mut DirectConvolver).unwrap();
    assert!((tail.sums.z[0] - 0.7 / 7.0).abs() < 1e-15);
    assert!((tail.sums.u[1] - 0.4 / 49.0).abs() < 1e-15);
    let lit = tail_literal(&ext, 6).unwrap();
    for (a, b) in tail.sums.flatten().iter().zip(lit.sums.flatten()) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn tail_difference_matches_literal_region_sums() {
    for (q, p, n) in [(2, 5, 40), (3, 8, 33)] {
        let t = sample_tableau(q, p, 8, 8).unwrap();
        let tail = tail_sample(&t, n).unwrap();
        let lit = tail_literal(&t.extend_to(n).unwrap(), p).unwrap();
        for (a, b) in tail.sums.flatten().iter().zip(lit.sums.flatten()) {
            assert!(rel_close(*a, b, 1e-11), "{a} vs {b}");
        }
    }
}

#[test]
fn tail_additivity() {
    let t = sample_tableau(3, 6, 2, 2).unwrap();
    let big = t.extend_to(60).unwrap();
    let a = tail_of_extended(&big.truncate(25).unwrap(), 6, &mut DirectConvolver).unwrap();
    let b = tail_of_extended(&big, 25, &mut DirectConvolver).unwrap();
    let c = tail_of_extended(&big, 6, &mut DirectConvolver).unwrap();
    for ((x, y), z) in a.sums.flatten().iter().zip(b.sums.flatten()).zip(c.sums.flatten()) {
        assert!((x + y - z).abs() <= 1e-10 * (1.0 + z.abs()));
    }
}

#[test]
fn conditional_mean_values() {
    let t = sample_tableau(2, 1, 0, 0).unwrap();
    let m = conditional_tail_mean(&t);
    let lay = layout(2).unwrap();
    assert!((m[lay.mu1] - (std::f64::consts::PI.powi(2) / 6.0 - 1.0)).abs() < 1e-12);
    for (i, v) in m.iter().enumerate() {
        let diag = [lay.mu1, lay.mu1 + 2, lay.mu2, lay.mu2 + 2].contains(&i);
        if !diag {
            assert_eq!(*v, 0.0);
        }
    }
    for p in [10, 100, 1000] {
        let t = sample_tableau(1, p, 0, 0).unwrap();
        let v = conditional_tail_mean(&t)[layout(1).unwrap().mu1];
        assert!(v >= 1.0 / (p as f64 + 1.0) && v <= 1.0 / p as f64);
    }
}

/// Inner Monte Carlo with per-entry standard errors.
fn inner_mc_with_se(t: &Tableau, n: usize, samples: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let q = t.q;
    let m = n - t.p;
    let head = partial_sums(t).flatten();
    let d = head.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(samples);
    for i in 0..samples {
        let stream = derive_stream(999, i as u64);
        let mut ex = vec![0.0; q * m];
        let mut ey = vec![0.0; q * m];
        for j in 0..q {
            let mut s = NormalStream::new(31, stream, channel(tag::COEFF, j as u64), 0);
            for r in 0..m {
                let (a, b) = s.next_pair();
                ex[j * m + r] = a;
                ey[j * m + r] = b;
            }
        }
        let full = partial_sums(&t.with_extension(m, &ex, &ey).unwrap()).flatten();
        rows.push(full.iter().zip(&head).map(|(a, b)| a - b).collect());
    }
    let nf = samples as f64;
    let mean: Vec<f64> = (0..d).map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / nf).collect();
    let mut cov = vec![0.0; d * d];
    let mut se = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            let prods: Vec<f64> = rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).collect();
            let c = prods.iter().sum::<f64>() / nf;
            let v = prods.iter().map(|x| (x - c).powi(2)).sum::<f64>() / nf;
            cov[a * d + b] = c;
            se[a * d + b] = (v / nf).sqrt();
        }
    }
    (cov, se, mean)
}

#[test]
fn analytic_covariance_matches_inner_monte_carlo() {
    for (q, p, seed) in [(2, 3, 1), (3, 2, 2)] {
        let n = 8 * p;
        let t = sample_tableau(q, p, seed, 4).unwrap();
        let an = conditional_tail_covariance(&t, CovarianceMethod::Analytic { n }).unwrap();
        let (mc, se, mean) = inner_mc_with_se(&t, n, 100_000);
        let d = layout(q).unwrap().d;
        let mut worst: f64 = 0.0;
        for i in 0..d * d {
            let z = (an[i] - mc[i]).abs() / se[i].max(1e-12);
            worst = worst.max(z);
        }
        assert!(worst < 4.0, "q={q} p={p}: worst z {worst}");
        let exact_mean = conditional_tail_mean_truncated(&t, n).unwrap();
        for a in 0..d {
            let sd = (an[a * d + a] / 100_000.0).sqrt();
            assert!((mean[a] - exact_mean[a]).abs() < 4.0 * sd + 1e-12);
        }
        // symmetric PSD
        for a in 0..d {
            for b in 0..d {
                assert!((an[a * d + b] - an[b * d + a]).abs() < 1e-14);
            }
        }
        let lay = layout(q).unwrap();
        let lam = lay.lambda;
        let s2: f64 = (p + 1..=n).map(|r| 1.0 / (r * r) as f64).sum();
        assert!((an[lam * d + lam] - 2.0 * s2).abs() < 1e-14);
    }
}

#[test]
fn pure_tail_covariance_with_zero_retained_block() {
    let q = 2;
    let p = 2;
    let n = 20;
    let t = Tableau::zeros(q, p);
    let an = conditional_tail_covariance(&t, CovarianceMethod::Analytic { n }).unwrap();
    let (mc, se, _) = inner_mc_with_se(&t, n, 100_000);
    let lay = layout(q).unwrap();
    let d = lay.d;
    for a in lay.delta..d {
        for b in lay.delta..d {
            let i = a * d + b;
            assert!((an[i] - mc[i]).abs() < 4.0 * se[i], "{a},{b}: {} vs {} (se {})", an[i], mc[i], se[i]);
        }
    }
}
