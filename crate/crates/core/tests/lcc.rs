mod common;

use alcc::alcc::MatrixBatch;
use alcc::lcc::{
    is_prime, largest_prime_at_most, lcc_encode, lcc_eval_and_decode, overflow_criterion_violated, quantize,
    quantize_value, FieldParams, IntermediateMode, LccShareSet,
};
use alcc::numerics::RMatrix;
use alcc::polyfun::PolyFn;
use alcc::Error;
use common::*;
use proptest::prelude::*;
use rand::Rng;

const P25: u64 = 33_554_393;

fn field(p: u64, b: u32, delta: f64) -> FieldParams {
    FieldParams::new(p, b, delta, IntermediateMode::Modular).unwrap()
}

fn scalars(values: &[f64]) -> MatrixBatch {
    MatrixBatch::new(values.iter().map(|&v| RMatrix::filled(1, 1, v)).collect()).unwrap()
}

fn normal_batch(seed: u64, k: usize, m: usize, n: usize, r: f64) -> MatrixBatch {
    let mut g = rng(seed);
    MatrixBatch::new((0..k).map(|_| random_real(&mut g, m, n, r)).collect()).unwrap()
}

fn n_workers(k: usize, t: usize, d: usize) -> usize {
    (k + t - 1) * d + 1
}

#[test]
fn primes() {
    assert_eq!(largest_prime_at_most(1 << 25), Some(P25));
    assert_eq!(largest_prime_at_most(1 << 26), Some(67_108_859));
    assert_eq!(largest_prime_at_most(1 << 28), Some(268_435_399));
    assert!(is_prime(97) && !is_prime(91) && !is_prime(1));
    let naive = |n: u64| n > 1 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
    for n in 0..5000 {
        assert_eq!(is_prime(n), naive(n), "{n}");
    }
}

#[test]
fn quantization_convention() {
    let f = field(97, 16, 0.25);
    let q = quantize(&scalars(&[0.0, -0.25, 3.7 * 0.25, -2.5 * 0.25]), &f);
    let vals: Vec<u64> = q.matrices.iter().map(|m| m.get(0, 0)).collect();
    assert_eq!(vals, vec![0, 96, 4, 94]);
    assert!(!q.input_overflow);
    assert_eq!(quantize_value(0.5, 1.0), 1);
    assert_eq!(quantize_value(-0.5, 1.0), -1);
    assert!(quantize(&scalars(&[49.0 * 0.25]), &f).input_overflow);
    assert!(quantize(&scalars(&[-49.0 * 0.25]), &f).input_overflow);
    let edge = quantize(&scalars(&[-48.0 * 0.25]), &f);
    assert!(!edge.input_overflow);
    assert_eq!(f.lift(edge.matrices[0].get(0, 0)), -48);
}

#[test]
fn field_validation() {
    assert!(matches!(FieldParams::new(91, 16, 1.0, IntermediateMode::Modular), Err(Error::NotPrime(91))));
    assert!(FieldParams::new(P25, 48, 1.0, IntermediateMode::Modular).is_err());
    assert!(FieldParams::new(P25, 64, 0.0, IntermediateMode::Modular).is_err());
    assert!(FieldParams::new(97, 8, 1.0, IntermediateMode::Modular).is_err());
    assert!(FieldParams::new(P25, 64, 1.0, IntermediateMode::IntegerOnce).is_ok());
}

#[test]
fn single_block_shares_are_the_data() {
    let f = field(P25, 64, 1.0 / 64.0);
    let x = normal_batch(1, 1, 3, 2, 4.0);
    let q = quantize(&x, &f);
    let shares = lcc_encode(&q, 1, 0, 5, &f, 9).unwrap();
    assert!(shares.shares.iter().all(|s| s.value == q.matrices[0]));
}

#[test]
fn small_field_roundtrip() {
    let f = field(97, 16, 1.0);
    let x = scalars(&[5.0, -17.0]);
    for seed in 0..20 {
        let shares = lcc_encode(&quantize(&x, &f), 2, 1, n_workers(2, 1, 1), &f, seed).unwrap();
        let out = lcc_eval_and_decode(&shares, &PolyFn::identity()).unwrap();
        assert_eq!(out.outputs[0].get(0, 0), 5.0);
        assert_eq!(out.outputs[1].get(0, 0), -17.0);
    }
}

#[test]
fn shares_interpolate_back_to_data() {
    let f = field(P25, 64, 1.0 / 64.0);
    let (k, t) = (3, 2);
    let x = normal_batch(2, k, 2, 2, 3.0);
    let q = quantize(&x, &f);
    let n = n_workers(k, t, 2);
    let shares = lcc_encode(&q, k, t, n, &f, 4).unwrap();
    let p = f.p as i128;
    for pos in 0..4 {
        // k + t shares pin down the degree-(k+t−1) encoding polynomial.
        let pts: Vec<(i128, i128)> = shares.shares[..k + t]
            .iter()
            .map(|s| ((k + t + s.worker) as i128, s.value.as_slice()[pos] as i128))
            .collect();
        for j in 0..k {
            let got = field_interpolate(&pts, j as i128 + 1, p);
            assert_eq!(got as u64, q.matrices[j].as_slice()[pos]);
        }
    }
}

#[test]
fn single_share_is_uniform() {
    let p = 97u64;
    let f = field(p, 16, 1.0);
    for data in [[3.0, -8.0], [40.0, 0.0]] {
        let q = quantize(&scalars(&data), &f);
        let draws = 10_000;
        let mut hist = vec![0usize; p as usize];
        for seed in 0..draws {
            let shares = lcc_encode(&q, 2, 1, 3, &f, seed).unwrap();
            hist[shares.shares[1].value.get(0, 0) as usize] += 1;
        }
        let expect = draws as f64 / p as f64;
        let chi2: f64 = hist.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 96 degrees of freedom; the 0.1% critical value is about 140.
        assert!(chi2 < 140.0, "χ² = {chi2}");
    }
}

#[test]
fn gram_inside_safe_region_is_exact() {
    let delta = 1.0 / 64.0;
    let f = field(P25, 64, delta);
    let (k, t, m, n) = (5, 3, 8, 6);
    let x = normal_batch(3, k, m, n, 1.5);
    let q = quantize(&x, &f);
    let s_a = m as f64;
    assert!(!overflow_criterion_violated(&f, 2, s_a, x.max_abs()));
    let shares = lcc_encode(&q, k, t, n_workers(k, t, 2), &f, 8).unwrap();
    let out = lcc_eval_and_decode(&shares, &PolyFn::gram()).unwrap();
    assert!(!out.overflow_flag);
    for (j, o) in out.outputs.iter().enumerate() {
        let ints: Vec<Vec<i128>> = q.matrices[j]
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|v| f.lift(v) as i128).collect())
            .collect();
        let want = naive_gram_int(&ints);
        for a in 0..n {
            for b in 0..n {
                assert_eq!(o.get(a, b), want[a][b] as f64 * delta * delta);
            }
        }
    }
}

#[test]
fn overflow_is_flagged_and_wrong() {
    let delta = 1.0 / 64.0;
    let f = field(8191, 26, delta);
    let (k, t, m, n) = (2, 1, 200, 3);
    let x = normal_batch(5, k, m, n, 1.0);
    let q = quantize(&x, &f);
    let shares = lcc_encode(&q, k, t, n_workers(k, t, 2), &f, 1).unwrap();
    let out = lcc_eval_and_decode(&shares, &PolyFn::gram()).unwrap();
    assert!(out.overflow_flag);
    let err = rel_err_real(&out.outputs[0], &naive_gram(&x.matrices()[0]));
    assert!(err > 0.1, "e_rel {err}");
}

#[test]
fn integer_once_wraps_at_word_size() {
    // Products of residues near p overflow 2^22 immediately.
    let delta = 1.0;
    let p = 4093;
    let once = FieldParams::new(p, 22, delta, IntermediateMode::IntegerOnce).unwrap();
    assert!(!once.capacity_ok(2, 4.0));
    let modular = FieldParams::new(p, 24, delta, IntermediateMode::Modular).unwrap();
    let x = scalars(&[7.0, -3.0]);
    let run = |fp: &FieldParams| {
        let sh = lcc_encode(&quantize(&x, fp), 2, 1, n_workers(2, 1, 2), fp, 3).unwrap();
        lcc_eval_and_decode(&sh, &PolyFn::gram()).unwrap().outputs
    };
    let good = run(&modular);
    assert_eq!(good[0].get(0, 0), 49.0);
    assert_eq!(good[1].get(0, 0), 9.0);
    let bad = run(&once);
    assert!(bad[0].get(0, 0) != 49.0 || bad[1].get(0, 0) != 9.0);
}

#[test]
fn mode_ordering_matches_closed_form() {
    for b in [32u32, 48, 64] {
        for (d, s_a, delta) in [(1usize, 1.0, 1.0), (2, 100.0, 1.0 / 64.0), (2, 1.0, 1.0), (3, 10.0, 0.5)] {
            let modular = FieldParams::for_bits(b, delta, IntermediateMode::Modular, d, s_a).unwrap();
            let once = FieldParams::for_bits(b, delta, IntermediateMode::IntegerOnce, d, s_a);
            let once_cap = (b as f64 - f64::log2(s_a / delta)) / d as f64;
            let claims_larger = once_cap > b as f64 / 2.0 + 1.0;
            match once {
                Ok(o) => {
                    assert!(o.capacity_ok(d, s_a));
                    if claims_larger {
                        assert!(o.p > modular.p, "b={b} D={d}");
                    }
                    if once_cap < b as f64 / 2.0 - 1.0 {
                        assert!(o.p < modular.p);
                    }
                }
                Err(_) => assert!(!claims_larger),
            }
        }
    }
}

#[test]
fn errors() {
    let f = field(97, 16, 1.0);
    let q = quantize(&scalars(&[1.0, 2.0]), &f);
    assert!(matches!(lcc_encode(&q, 2, 1, 94, &f, 0), Err(Error::FieldTooSmall { .. })));
    let mut shares = lcc_encode(&q, 2, 1, 3, &f, 0).unwrap();
    shares.shares.pop();
    assert!(matches!(
        lcc_eval_and_decode(&shares, &PolyFn::identity()),
        Err(Error::InsufficientWorkers { needed: 3, got: 2 })
    ));
    let sq = PolyFn::GeneralEntrywise {
        poly: alcc::polyfun::EntrywisePoly {
            input_dims: (1, 1),
            output_dims: (1, 1),
            entries: vec![vec![
                alcc::polyfun::Monomial { coef: 1.0, vars: vec![(0, 0), (0, 0)] },
                alcc::polyfun::Monomial { coef: 1.0, vars: vec![(0, 0)] },
            ]],
        },
    };
    let shares = lcc_encode(&q, 2, 1, 5, &f, 0).unwrap();
    assert!(lcc_eval_and_decode(&shares, &sq).is_err());
}

#[test]
fn wire_roundtrip() {
    let dir = std::env::temp_dir().join(format!("alcc-lcc-wire-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = field(P25, 64, 1.0 / 64.0);
    let shares = lcc_encode(&quantize(&normal_batch(7, 2, 3, 3, 2.0), &f), 2, 1, 5, &f, 2).unwrap();
    shares.save(&dir.join("s")).unwrap();
    assert_eq!(LccShareSet::load(&dir.join("s")).unwrap(), shares);
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dequantize_error_is_half_step(x in -1e3..1e3f64, e in -10i32..4) {
        let delta = 2f64.powi(e);
        let f = field(P25, 64, delta);
        let q = quantize(&scalars(&[x]), &f);
        prop_assume!(!q.input_overflow);
        let back = f.lift(q.matrices[0].get(0, 0)) as f64 * delta;
        prop_assert!((back - x).abs() <= delta / 2.0);
    }

    #[test]
    fn exact_inside_safe_region(seed in any::<u64>(), k in 1usize..=4, t in 0usize..=3, m in 1usize..=12) {
        let delta = 1.0 / 16.0;
        let f = field(P25, 64, delta);
        let mut g = rng(seed);
        let n = g.random_range(1..=4);
        let x = normal_batch(seed, k, m, n, 2.0);
        prop_assert!(!overflow_criterion_violated(&f, 2, m as f64, 2.0));
        let q = quantize(&x, &f);
        let shares = lcc_encode(&q, k, t, n_workers(k, t, 2) + 1, &f, seed).unwrap();
        let out = lcc_eval_and_decode(&shares, &PolyFn::gram()).unwrap();
        for (j, o) in out.outputs.iter().enumerate() {
            let ints: Vec<Vec<i128>> = q.matrices[j]
                .to_rows()
                .into_iter()
                .map(|row| row.into_iter().map(|v| f.lift(v) as i128).collect())
                .collect();
            let want = naive_gram_int(&ints);
            for a in 0..n {
                for b in 0..n {
                    prop_assert_eq!(o.get(a, b), want[a][b] as f64 * delta * delta);
                }
            }
        }
    }
}
