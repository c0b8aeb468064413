use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::CMatrix;
use crate::error::{invalid, Result};

/// Truncated circular-symmetric complex Gaussian.
///
/// `sigma` is the per-entry standard deviation of the complex variable, so
/// each real component has standard deviation `sigma/√2` before truncation.
/// Each component is truncated independently to `[-theta·sigma, theta·sigma]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexGaussianSpec {
    pub sigma: f64,
    pub theta: f64,
    pub seed: u64,
}

impl ComplexGaussianSpec {
    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(invalid("sigma", format!("must be a finite nonnegative number, got {}", self.sigma)));
        }
        if !(self.theta > 0.0) {
            return Err(invalid("theta", format!("must be positive, got {}", self.theta)));
        }
        Ok(())
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from `seed` (SplitMix64 finalizer).
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One standard-normal component scaled by `std`, resampled until it lands
/// inside `[-bound, bound]`.
fn truncated_component<R: Rng + ?Sized>(rng: &mut R, std: f64, bound: f64) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let x = z * std;
        if x.abs() <= bound {
            return x;
        }
    }
}

/// Fills a `rows × cols` matrix from `rng`. Used by the encoder to draw
/// several noise blocks from one stream.
pub fn sample_truncated_with<R: Rng + ?Sized>(
    rng: &mut R,
    sigma: f64,
    theta: f64,
    rows: usize,
    cols: usize,
) -> Result<CMatrix> {
    ComplexGaussianSpec { sigma, theta, seed: 0 }.validate()?;
    if sigma == 0.0 {
        return Ok(CMatrix::zeros(rows, cols));
    }
    let std = sigma / std::f64::consts::SQRT_2;
    let bound = theta * sigma;
    let data = (0..rows * cols)
        .map(|_| {
            let re = truncated_component(rng, std, bound);
            let im = truncated_component(rng, std, bound);
            Complex64::new(re, im)
        })
        .collect();
    CMatrix::from_vec(rows, cols, data)
}

pub fn sample_truncated_complex_gaussian(spec: &ComplexGaussianSpec, rows: usize, cols: usize) -> Result<CMatrix> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    sample_truncated_with(&mut rng, spec.sigma, spec.theta, rows, cols)
}
