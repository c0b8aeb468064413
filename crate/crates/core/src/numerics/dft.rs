use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `exp(2πi · num / order)`. Quadrant points are exact; when `order` is a
/// multiple of four the angle is first reduced into `[0, π/2)`.
pub fn unit_root(num: i64, order: usize) -> Complex64 {
    assert!(order > 0, "root of unity of order zero");
    let n = order as i64;
    let k = num.rem_euclid(n);
    if (4 * k) % n == 0 {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    if n % 4 != 0 {
        let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
        return Complex64::new(c, s);
    }
    let quarter = n / 4;
    let (s, c) = (2.0 * PI * (k % quarter) as f64 / n as f64).sin_cos();
    match k / quarter {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// Precomputed length-`K` transform. Forward: `X[l] = Σ_j x[j] ω^{-jl}` with
/// `ω = exp(2πi/K)`; inverse divides by `K` and uses `ω^{+jl}`.
#[derive(Clone, Debug)]
pub struct DftPlan {
    len: usize,
    /// `twiddle[q] = ω^{-q}`.
    twiddle: Vec<Complex64>,
    radix2: bool,
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyTransform);
        }
        Ok(Self {
            len,
            twiddle: (0..len).map(|q| unit_root(-(q as i64), len)).collect(),
            radix2: len.is_power_of_two() && len >= 2,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Forward transform of `input` into `out` (both length `len`).
    pub fn forward(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.transform(input, out, false);
    }

    /// Inverse transform of `input` into `out`, including the `1/K` factor.
    pub fn inverse(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.transform(input, out, true);
        let s = 1.0 / self.len as f64;
        out.iter_mut().for_each(|z| *z *= s);
    }

    fn tw(&self, q: usize, inverse: bool) -> Complex64 {
        let w = self.twiddle[q % self.len];
        if inverse {
            w.conj()
        } else {
            w
        }
    }

    fn transform(&self, input: &[Complex64], out: &mut [Complex64], inverse: bool) {
        assert_eq!(input.len(), self.len);
        assert_eq!(out.len(), self.len);
        if self.radix2 {
            self.radix2_transform(input, out, inverse);
        } else {
            self.direct(input, out, inverse);
        }
    }

    fn direct(&self, input: &[Complex64], out: &mut [Complex64], inverse: bool) {
        let k = self.len;
        for (l, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in input.iter().enumerate() {
                acc += x * self.tw(j * l % k, inverse);
            }
            *o = acc;
        }
    }

    fn radix2_transform(&self, input: &[Complex64], out: &mut [Complex64], inverse: bool) {
        let n = self.len;
        let bits = n.trailing_zeros();
        for (i, &x) in input.iter().enumerate() {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            out[j] = x;
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let w = self.tw(j * step, inverse);
                    let a = out[start + j];
                    let b = out[start + j + half] * w;
                    out[start + j] = a + b;
                    out[start + j + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

/// Forward DFT: `out[l] = Σ_j v[j] ω^{-jl}`, `ω = exp(2πi/K)`.
pub fn dft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = DftPlan::new(v.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    plan.forward(v, &mut out);
    Ok(out)
}

/// Inverse of [`dft`].
pub fn idft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = DftPlan::new(v.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    plan.inverse(v, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn empty_transform_errors() {
        assert!(matches!(dft(&[]), Err(Error::EmptyTransform)));
        assert!(matches!(idft(&[]), Err(Error::EmptyTransform)));
    }

    #[test]
    fn impulse_gives_all_ones() {
        let out = dft(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        for z in out {
            assert!((z - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_gives_dc_only() {
        for k in [3usize, 5, 8, 12] {
            let v = vec![c(0.7, -1.3); k];
            let out = dft(&v).unwrap();
            assert!((out[0] - c(0.7, -1.3) * k as f64).norm() < 1e-13);
            for z in &out[1..] {
                assert!(z.norm() < 1e-13, "k={k}: {z}");
            }
        }
    }

    #[test]
    fn unit_roots_hit_exact_quadrants() {
        assert_eq!(unit_root(1, 4), c(0.0, 1.0));
        assert_eq!(unit_root(2, 4), c(-1.0, 0.0));
        assert_eq!(unit_root(-1, 4), c(0.0, -1.0));
        assert_eq!(unit_root(5, 8), unit_root(-3, 8));
        for n in 1..40usize {
            for k in -50i64..50 {
                let direct = Complex64::from_polar(1.0, 2.0 * PI * k.rem_euclid(n as i64) as f64 / n as f64);
                assert!((unit_root(k, n) - direct).norm() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn roundtrip_and_parseval() {
        for k in 1..=33usize {
            let v: Vec<_> = (0..k).map(|i| c((i as f64).sin() * 3.0, (i * i) as f64 * 0.01 - 1.0)).collect();
            let f = dft(&v).unwrap();
            let back = idft(&f).unwrap();
            let diff: Vec<_> = back.iter().zip(&v).map(|(a, b)| a - b).collect();
            assert!(norm(&diff) <= 1e-12 * norm(&v), "roundtrip k={k}");
            let ratio = norm(&f).powi(2) / (k as f64 * norm(&v).powi(2));
            assert!((ratio - 1.0).abs() < 1e-10, "parseval k={k}");
        }
    }
}
