use iterint::FftConvolver;
use iterint_core::fourier_tableau::{partial_sums_with, sample_tableau, Convolver, DirectConvolver};
use iterint_core::rng::{channel, tag, NormalStream};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_seq(n: usize, stream: u64) -> Vec<Complex64> {
    let mut v = vec![0.0; 2 * n];
    NormalStream::new(11, stream, channel(tag::AUX, 0), 0).fill(&mut v);
    (0..n).map(|i| Complex64::new(v[2 * i], v[2 * i + 1])).collect()
}

fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn check_pairs(n: usize, len: usize) {
    let s: Vec<Vec<Complex64>> = (0..3).map(|k| complex_seq(n, 100 * n as u64 + k)).collect();
    let refs: Vec<&[Complex64]> = s.iter().map(|v| v.as_slice()).collect();
    let pairs = [(0, 1), (1, 0), (2, 2), (0, 2)];
    let fast = FftConvolver::new().convolve_pairs(&refs, &pairs, len);
    let slow = DirectConvolver.convolve_pairs(&refs, &pairs, len);
    for (f, d) in fast.iter().zip(&slow) {
        let scale = (n as f64).sqrt() * 4.0;
        assert!(max_err(f, d) <= 1e-12 * scale, "n={n} len={len}: {}", max_err(f, d));
    }
}

#[test]
fn convolutions_match_direct_sums() {
    for n in (1..=70).chain([100, 127, 128, 129, 257, 512]) {
        check_pairs(n, n);
        check_pairs(n, 2 * n - 1);
        check_pairs(n, (n / 2).max(1));
    }
}

#[test]
fn toeplitz_hankel_matches_direct_sums() {
    let mut conv = FftConvolver::new();
    for n in (1..=70).chain([100, 255, 256, 257, 1024]) {
        let a = complex_seq(n, n as u64);
        let f = conv.toeplitz_hankel(&a);
        let d = DirectConvolver.toeplitz_hankel(&a);
        let scale = (n as f64).sqrt() * (n as f64).ln().max(1.0);
        assert!(max_err(&f, &d) <= 1e-12 * scale, "n={n}: {}", max_err(&f, &d));
    }
}

#[test]
fn partial_sums_agree_between_backends() {
    let mut conv = FftConvolver::new();
    for (q, p) in [(1, 3), (2, 25), (3, 64), (2, 257)] {
        let t = sample_tableau(q, p, 5, p as u64).unwrap();
        let a = partial_sums_with(&t, &mut conv).flatten();
        let b = partial_sums_with(&t, &mut DirectConvolver).flatten();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "q={q} p={p}: {x} vs {y}");
        }
    }
}

#[test]
fn convolver_reuse_is_stateless() {
    let mut conv = FftConvolver::new();
    let a = complex_seq(90, 1);
    let first = conv.toeplitz_hankel(&a);
    conv.toeplitz_hankel(&complex_seq(300, 2));
    conv.toeplitz_hankel(&complex_seq(90, 3));
    assert_eq!(first, conv.toeplitz_hankel(&a));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn random_lengths_match(n in 1usize..200, len_frac in 0.1f64..1.99, stream in 0u64..1000) {
        let len = ((n as f64 * len_frac) as usize).clamp(1, 2 * n - 1);
        let a = complex_seq(n, stream);
        let b = complex_seq(n, stream + 7);
        let refs = [a.as_slice(), b.as_slice()];
        let f = FftConvolver::new().convolve_pairs(&refs, &[(0, 1)], len);
        let d = DirectConvolver.convolve_pairs(&refs, &[(0, 1)], len);
        prop_assert!(max_err(&f[0], &d[0]) <= 1e-11 * (n as f64).sqrt());
    }
}
