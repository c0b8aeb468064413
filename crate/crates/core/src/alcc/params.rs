use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::numerics::unit_root;

/// Protocol parameters. The worker count is derived, never stored:
/// `N = (k + t − 1)·D + s + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlccParams {
    /// Batch size.
    pub k: usize,
    /// Maximum number of colluding workers.
    pub t: usize,
    /// Maximum number of stragglers.
    pub s: usize,
    /// Total degree `D` of the evaluated polynomial.
    pub degree: usize,
    /// Radius of the circle carrying the interpolation points `β_j`.
    pub beta: f64,
    /// Noise standard deviation `σ_n`; each noise entry has std `σ_n/√t`.
    pub sigma_n: f64,
    /// Noise truncation multiplier.
    pub theta: f64,
    /// Bound on the magnitude of every data entry.
    pub r: f64,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

impl Default for AlccParams {
    fn default() -> Self {
        Self {
            k: 1,
            t: 0,
            s: 0,
            degree: 1,
            beta: 1.5,
            sigma_n: 0.0,
            theta: 3.0,
            r: 1.0,
            m: 1,
            n: 1,
            seed: 0,
        }
    }
}

impl AlccParams {
    /// `k + t`, the number of interpolation points.
    pub fn big_k(&self) -> usize {
        self.k + self.t
    }

    /// `D̃ = (k + t − 1)·D`, the degree of `f(u(z))`.
    pub fn d_tilde(&self) -> usize {
        (self.k + self.t - 1) * self.degree
    }

    pub fn n_workers(&self) -> usize {
        self.d_tilde() + self.s + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("k", "batch size must be at least 1"));
        }
        if self.degree == 0 {
            return Err(invalid("degree", "must be at least 1"));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", format!("must be positive and finite, got {}", self.beta)));
        }
        if !(self.r > 0.0) {
            return Err(invalid("r", format!("must be positive, got {}", self.r)));
        }
        if !(self.sigma_n >= 0.0) || !self.sigma_n.is_finite() {
            return Err(invalid("sigma_n", format!("must be finite and nonnegative, got {}", self.sigma_n)));
        }
        if !(self.theta > 0.0) {
            return Err(invalid("theta", format!("must be positive, got {}", self.theta)));
        }
        if self.m == 0 || self.n == 0 {
            return Err(invalid("m", "matrix dimensions must be positive"));
        }
        Ok(())
    }

    /// Per-entry standard deviation of each noise block.
    pub fn noise_std(&self) -> f64 {
        if self.t == 0 {
            0.0
        } else {
            self.sigma_n / (self.t as f64).sqrt()
        }
    }

    /// `β_j = β·ω^{j−1}`, `ω = exp(2πi/(k+t))`, for `j ∈ 1..=k+t`.
    pub fn beta_point(&self, j: usize) -> Result<Complex64> {
        let kk = self.big_k();
        if j == 0 || j > kk {
            return Err(Error::IndexOutOfRange { index: j, max: kk });
        }
        Ok(unit_root(j as i64 - 1, kk) * self.beta)
    }

    /// `α_i = γ^{i−1}`, `γ = exp(2πi/N)`, for `i ∈ 1..=N`.
    pub fn alpha_point(&self, i: usize) -> Result<Complex64> {
        let n = self.n_workers();
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        Ok(unit_root(i as i64 - 1, n))
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("params serialize");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `l_j(z) = (1/K)·Σ_{l<K} (z/β_j)^l`.
pub fn lagrange_monomial(j: usize, z: Complex64, params: &AlccParams) -> Result<Complex64> {
    params.validate()?;
    let bj = params.beta_point(j)?;
    let kk = params.big_k();
    let q = z / bj;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..kk {
        acc = acc * q + 1.0;
    }
    Ok(acc / kk as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_count_follows_degree() {
        let p = AlccParams { k: 5, t: 3, s: 0, degree: 2, ..Default::default() };
        assert_eq!(p.d_tilde(), 14);
        assert_eq!(p.n_workers(), 15);
        let p = AlccParams { s: 2, ..p };
        assert_eq!(p.n_workers(), 17);
    }

    #[test]
    fn monomial_closed_form_value() {
        let p = AlccParams { k: 2, t: 2, beta: 1.0, ..Default::default() };
        let v = lagrange_monomial(1, Complex64::new(0.5, 0.0), &p).unwrap();
        assert!((v - Complex64::new(0.46875, 0.0)).norm() < 1e-15);
        assert!(lagrange_monomial(5, v, &p).is_err());
        assert!(lagrange_monomial(0, v, &p).is_err());
    }

    #[test]
    fn fingerprint_tracks_every_field() {
        let a = AlccParams::default();
        let b = AlccParams { seed: 1, ..a.clone() };
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn rejects_bad_values() {
        for p in [
            AlccParams { k: 0, ..Default::default() },
            AlccParams { degree: 0, ..Default::default() },
            AlccParams { beta: 0.0, ..Default::default() },
            AlccParams { r: 0.0, ..Default::default() },
            AlccParams { sigma_n: -1.0, ..Default::default() },
            AlccParams { theta: 0.0, ..Default::default() },
        ] {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
