mod common;

use alcc::numerics::{
    condition_number, dft, idft, sample_truncated_complex_gaussian, singular_values, solve_vandermonde, unit_root,
    vandermonde, CMatrix, ComplexGaussianSpec, DftPlan,
};
use alcc::Error;
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn roots(m: usize) -> Vec<Complex64> {
    (0..m as i64).map(|i| unit_root(i, m)).collect()
}

#[test]
fn dft_impulse_and_constant() {
    let out = dft(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
    for z in out {
        assert!((z - c(1.0)).norm() < 1e-15);
    }
    let v = Complex64::new(0.3, -1.2);
    let out = dft(&[v; 6]).unwrap();
    assert!((out[0] - v * 6.0).norm() < 1e-14);
    assert!(out[1..].iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn dft_matches_direct_sum() {
    let mut g = rng(7);
    for len in [7, 8, 13, 16, 64] {
        let v: Vec<Complex64> = random_complex(&mut g, 1, len).into_vec();
        let want = brute_dft(&v);
        let got = dft(&v).unwrap();
        assert!(vec_diff(&got, &want) <= 1e-12 * vec_norm(&want), "len {len}");
    }
}

#[test]
fn dft_plan_reuses() {
    let plan = DftPlan::new(5).unwrap();
    let v: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
    let mut out = vec![Complex64::default(); 5];
    plan.forward(&v, &mut out);
    assert_eq!(out, dft(&v).unwrap());
    let mut back = vec![Complex64::default(); 5];
    plan.inverse(&out, &mut back);
    assert!(vec_diff(&back, &v) < 1e-12 * vec_norm(&v));
}

#[test]
fn empty_transform() {
    assert!(matches!(dft(&[]), Err(Error::EmptyTransform)));
    assert!(matches!(idft(&[]), Err(Error::EmptyTransform)));
    assert_eq!(dft(&[]).unwrap_err().to_string(), "empty transform");
}

#[test]
fn unitary_vandermonde_solve() {
    let coef = vec![c(1.0), Complex64::new(-2.0, 0.5), c(0.25), Complex64::new(0.0, 3.0)];
    let nodes = roots(4);
    let rhs = CMatrix::from_fn(4, 1, |i, _| (0..4).map(|l| coef[l] * nodes[i].powu(l as u32)).sum());
    let got = solve_vandermonde(&nodes, &rhs).unwrap();
    for (l, &want) in coef.iter().enumerate() {
        assert!((got.get(l, 0) - want).norm() < 1e-12);
    }
}

#[test]
fn straggler_vandermonde_solve() {
    let mut g = rng(11);
    let coef = random_complex(&mut g, 5, 3);
    let nodes: Vec<Complex64> = roots(6).into_iter().filter(|z| (*z - unit_root(2, 6)).norm() > 1e-9).collect();
    assert_eq!(nodes.len(), 5);
    let b = vandermonde(&nodes, 5);
    let rhs = b.matmul(&coef).unwrap();
    let got = solve_vandermonde(&nodes, &rhs).unwrap();
    assert!(rel_err(&got, &coef) < 1e-10);
    let resid = diff_norm(&b.matmul(&got).unwrap(), &rhs);
    assert!(resid <= 1e-8 * rhs.frobenius_norm());
}

#[test]
fn singular_and_empty_systems() {
    let nodes = [c(1.0), c(2.0), c(1.0)];
    let rhs = CMatrix::zeros(3, 1);
    assert!(matches!(solve_vandermonde(&nodes, &rhs), Err(Error::SingularSystem)));
    assert_eq!(solve_vandermonde(&nodes, &rhs).unwrap_err().to_string(), "singular system");
    assert!(matches!(condition_number(&nodes), Err(Error::SingularSystem)));
    assert!(matches!(solve_vandermonde(&[], &CMatrix::zeros(0, 1)), Err(Error::EmptySystem)));
}

#[test]
fn roots_of_unity_are_perfectly_conditioned() {
    assert!((condition_number(&roots(8)).unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(condition_number(&[c(1.0)]).unwrap(), 1.0);
    for m in 2..=64 {
        assert!((condition_number(&roots(m)).unwrap() - 1.0).abs() < 1e-9, "M = {m}");
    }
}

#[test]
fn dropped_root_conditioning() {
    let nodes: Vec<Complex64> = roots(8).into_iter().take(7).collect();
    let kappa = condition_number(&nodes).unwrap();
    assert!(kappa > 1.0);
    // Ñ = 9 for N = 8, s = 1.
    assert!(kappa <= 9f64.powi(7));
    let sv = singular_values(&vandermonde(&nodes, 7));
    assert!((kappa - sv[0] / sv[6]).abs() < 1e-9 * kappa);
}

#[test]
fn sampling_statistics() {
    let spec = ComplexGaussianSpec { sigma: 1.0, theta: 3.0, seed: 2024 };
    let z = sample_truncated_complex_gaussian(&spec, 1000, 1000).unwrap();
    let n = z.as_slice().len() as f64;
    let (mut s_re, mut s_im, mut q_re, mut q_im) = (0.0, 0.0, 0.0, 0.0);
    for v in z.as_slice() {
        assert!(v.re.abs() <= 3.0 && v.im.abs() <= 3.0);
        s_re += v.re;
        s_im += v.im;
        q_re += v.re * v.re;
        q_im += v.im * v.im;
    }
    for (s, q) in [(s_re, q_re), (s_im, q_im)] {
        let std = (q / n - (s / n).powi(2)).sqrt();
        assert!((std / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.05, "std {std}");
    }
}

#[test]
fn sampling_is_deterministic() {
    let spec = ComplexGaussianSpec { sigma: 0.7, theta: 2.0, seed: 5 };
    let a = sample_truncated_complex_gaussian(&spec, 20, 30).unwrap();
    let b = sample_truncated_complex_gaussian(&spec, 20, 30).unwrap();
    assert_eq!(a, b);
    let zero = ComplexGaussianSpec { sigma: 0.0, ..spec };
    assert_eq!(sample_truncated_complex_gaussian(&zero, 3, 3).unwrap().max_abs(), 0.0);
    let bad = ComplexGaussianSpec { theta: 0.0, ..spec };
    assert!(sample_truncated_complex_gaussian(&bad, 1, 1).is_err());
}

fn complex_vec(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 1..=max_len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_roundtrip(v in complex_vec(64)) {
        let back = idft(&dft(&v).unwrap()).unwrap();
        prop_assert!(vec_diff(&back, &v) <= 1e-12 * vec_norm(&v).max(1e-300));
    }

    #[test]
    fn parseval(v in complex_vec(64)) {
        let f = dft(&v).unwrap();
        let lhs = vec_norm(&f).powi(2);
        let rhs = v.len() as f64 * vec_norm(&v).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
    }

    #[test]
    fn solve_residual(m in 2usize..24, drop in 0usize..3, seed in any::<u64>()) {
        let n = m + drop;
        let nodes: Vec<Complex64> = roots(n).into_iter().take(m).collect();
        prop_assume!(condition_number(&nodes).unwrap() <= 1e6);
        let mut g = rng(seed);
        let rhs = random_complex(&mut g, m, 2);
        let v = solve_vandermonde(&nodes, &rhs).unwrap();
        let resid = diff_norm(&vandermonde(&nodes, m).matmul(&v).unwrap(), &rhs);
        prop_assert!(resid <= 1e-8 * rhs.frobenius_norm());
    }

    #[test]
    fn truncation_never_exceeded(sigma in 0.0..50.0f64, theta in 0.2..5.0f64, seed in any::<u64>()) {
        let spec = ComplexGaussianSpec { sigma, theta, seed };
        let z = sample_truncated_complex_gaussian(&spec, 16, 16).unwrap();
        let bound = theta * sigma;
        prop_assert!(z.as_slice().iter().all(|v| v.re.abs() <= bound && v.im.abs() <= bound));
    }
}
