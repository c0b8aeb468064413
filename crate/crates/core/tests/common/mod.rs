//! Reference implementations used only by the tests. Each one follows the
//! textbook definition directly and shares no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use alcc::numerics::{CMatrix, RMatrix};
use alcc::polyfun::EntrywisePoly;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `out[l] = Σ_j v[j]·exp(−2πi·j·l/K)`.
pub fn brute_dft(v: &[Complex64]) -> Vec<Complex64> {
    let k = v.len();
    (0..k)
        .map(|l| {
            v.iter()
                .enumerate()
                .map(|(j, &x)| x * cis(-2.0 * PI * ((j * l) % k) as f64 / k as f64))
                .sum()
        })
        .collect()
}

pub fn beta_points(big_k: usize, beta: f64) -> Vec<Complex64> {
    (0..big_k).map(|j| beta * cis(2.0 * PI * j as f64 / big_k as f64)).collect()
}

pub fn alpha_points(n: usize) -> Vec<Complex64> {
    (0..n).map(|i| cis(2.0 * PI * i as f64 / n as f64)).collect()
}

/// `Π_{l≠j} (z − β_l)/(β_j − β_l)`, `j` zero-based.
pub fn product_lagrange(j: usize, z: Complex64, betas: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (l, &bl) in betas.iter().enumerate() {
        if l != j {
            acc *= (z - bl) / (betas[j] - bl);
        }
    }
    acc
}

/// `u(α_i) = Σ_j W_j·l_j(α_i)` with product-form Lagrange polynomials.
pub fn product_form_shares(data: &[RMatrix], noise: &[CMatrix], beta: f64, n_workers: usize) -> Vec<CMatrix> {
    let blocks: Vec<CMatrix> = data.iter().map(|x| x.to_complex()).chain(noise.iter().cloned()).collect();
    let betas = beta_points(blocks.len(), beta);
    let (m, n) = blocks[0].dims();
    alpha_points(n_workers)
        .into_iter()
        .map(|a| {
            let w: Vec<Complex64> = (0..blocks.len()).map(|j| product_lagrange(j, a, &betas)).collect();
            CMatrix::from_fn(m, n, |r, c| blocks.iter().zip(&w).map(|(b, &l)| b.get(r, c) * l).sum())
        })
        .collect()
}

/// Evaluates `Σ coef·Π x[i][j]` term by term.
pub fn monomial_eval(poly: &EntrywisePoly, x: &CMatrix) -> CMatrix {
    let (u, h) = poly.output_dims;
    CMatrix::from_fn(u, h, |r, c| {
        poly.entries[r * h + c]
            .iter()
            .map(|mono| {
                let mut term = Complex64::new(mono.coef, 0.0);
                for &(i, j) in &mono.vars {
                    term *= x.get(i, j);
                }
                term
            })
            .sum()
    })
}

/// `XᵀX` by the definition.
pub fn naive_gram(x: &RMatrix) -> RMatrix {
    let (m, n) = x.dims();
    RMatrix::from_fn(n, n, |i, j| (0..m).map(|r| x.get(r, i) * x.get(r, j)).sum())
}

pub fn naive_gram_int(x: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = x[0].len();
    (0..n)
        .map(|i| (0..n).map(|j| x.iter().map(|row| row[i] * row[j]).sum()).collect())
        .collect()
}

pub fn pow_mod(mut a: i128, mut e: i128, p: i128) -> i128 {
    let mut acc = 1;
    a = a.rem_euclid(p);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    acc
}

/// Lagrange interpolation over `F_p` through `(x, y)` pairs, evaluated at `z`.
pub fn field_interpolate(points: &[(i128, i128)], z: i128, p: i128) -> i128 {
    let mut acc = 0;
    for (j, &(xj, yj)) in points.iter().enumerate() {
        let (mut num, mut den) = (1i128, 1i128);
        for (l, &(xl, _)) in points.iter().enumerate() {
            if l != j {
                num = num * (z - xl).rem_euclid(p) % p;
                den = den * (xj - xl).rem_euclid(p) % p;
            }
        }
        acc = (acc + yj * num % p * pow_mod(den, p - 2, p)) % p;
    }
    acc
}

/// `Σ_{i=0}^{D̃/2} β^{2i}` for even `D̃`.
pub fn beta_bar_direct(beta: f64, d_tilde: usize) -> f64 {
    assert!(d_tilde % 2 == 0);
    (0..=d_tilde / 2).map(|i| beta.powi(2 * i as i32)).sum()
}

/// `(k·r/(k+t))·Σ_{l<k+t} β^{−l}`.
pub fn d_mean_direct(k: usize, t: usize, r: f64, beta: f64) -> f64 {
    let kk = k + t;
    k as f64 * r / kk as f64 * (0..kk).map(|l| beta.powi(-(l as i32))).sum::<f64>()
}

/// The truncated-noise bound written out with plain `powi`.
pub fn truncated_ds_direct(eta_s: f64, theta: f64, t: usize, shift: f64) -> f64 {
    let w = (1.0 - 2.0 * (-theta * theta / 2.0).exp()).powi(t as i32);
    let tail = (2.0 * (-0.5 * (theta - shift).powi(2)).exp()).powi(t as i32);
    eta_s / w + tail / w
}

pub fn random_real(rng: &mut impl Rng, rows: usize, cols: usize, r: f64) -> RMatrix {
    RMatrix::from_fn(rows, cols, |_, _| rng.random_range(-r..=r))
}

pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn diff_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel_err(got: &CMatrix, want: &CMatrix) -> f64 {
    diff_norm(got, want) / want.frobenius_norm().max(f64::MIN_POSITIVE)
}

pub fn rel_err_real(got: &RMatrix, want: &RMatrix) -> f64 {
    rel_err(&got.to_complex(), &want.to_complex())
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
