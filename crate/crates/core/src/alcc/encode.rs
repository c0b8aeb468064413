use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::params::AlccParams;
use crate::error::{Error, Result};
use crate::exec;
use crate::numerics::{mix_seed, rng_from_seed, sample_truncated_with, CMatrix, DftPlan, RMatrix};

/// The dataset `X_1, …, X_k`, all of the same shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixBatch {
    matrices: Vec<RMatrix>,
}

impl MatrixBatch {
    pub fn new(matrices: Vec<RMatrix>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::DimensionMismatch("batch is empty".into()));
        };
        let dims = first.dims();
        if let Some(bad) = matrices.iter().find(|x| x.dims() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "batch mixes {}x{} and {}x{} matrices",
                dims.0,
                dims.1,
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { matrices })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.matrices[0].dims()
    }

    pub fn matrices(&self) -> &[RMatrix] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<RMatrix> {
        self.matrices
    }

    pub fn max_abs(&self) -> f64 {
        self.matrices.iter().map(RMatrix::max_abs).fold(0.0, f64::max)
    }
}

/// One worker's share `Y_i = u(α_i)`. Worker indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Share {
    pub worker: usize,
    pub value: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShareSet {
    pub params_fingerprint: String,
    pub shares: Vec<Share>,
}

impl ShareSet {
    pub fn get(&self, worker: usize) -> Option<&CMatrix> {
        self.shares.iter().find(|s| s.worker == worker).map(|s| &s.value)
    }
}

fn check_batch(batch: &MatrixBatch, params: &AlccParams) -> Result<()> {
    if batch.len() != params.k {
        return Err(Error::DimensionMismatch(format!(
            "expected {} matrices, got {}",
            params.k,
            batch.len()
        )));
    }
    if batch.dims() != (params.m, params.n) {
        let (m, n) = batch.dims();
        return Err(Error::DimensionMismatch(format!(
            "expected {}x{} matrices, got {m}x{n}",
            params.m, params.n
        )));
    }
    Ok(())
}

fn check_range(batch: &MatrixBatch, r: f64) -> Result<()> {
    for x in batch.matrices() {
        for &v in x.as_slice() {
            if !(v.abs() <= r) {
                return Err(Error::DataOutOfRange { value: v, bound: r });
            }
        }
    }
    Ok(())
}

/// Noise source for the `t` blocks. Block `j` draws from its own stream, so
/// sampling a matrix in consecutive row slices gives the same entries as
/// sampling it whole.
pub struct NoiseStreams {
    rngs: Vec<ChaCha20Rng>,
    std: f64,
    theta: f64,
}

impl NoiseStreams {
    pub fn new(params: &AlccParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            rngs: (0..params.t as u64).map(|j| rng_from_seed(mix_seed(params.seed, j))).collect(),
            std: params.noise_std(),
            theta: params.theta,
        })
    }

    /// The next `rows` rows of every noise block.
    pub fn next_rows(&mut self, rows: usize, cols: usize) -> Result<Vec<CMatrix>> {
        let (std, theta) = (self.std, self.theta);
        self.rngs
            .iter_mut()
            .map(|rng| sample_truncated_with(rng, std, theta, rows, cols))
            .collect()
    }
}

/// Draws the full `m × n` noise blocks for `params.seed`.
pub fn sample_noise(params: &AlccParams) -> Result<Vec<CMatrix>> {
    NoiseStreams::new(params)?.next_rows(params.m, params.n)
}

/// Encodes `batch` with freshly sampled noise.
pub fn encode(batch: &MatrixBatch, params: &AlccParams) -> Result<ShareSet> {
    params.validate()?;
    check_batch(batch, params)?;
    let noise = sample_noise(params)?;
    encode_with_noise(batch, &noise, params)
}

/// Encodes `batch` with caller-supplied noise blocks `N_1, …, N_t`.
pub fn encode_with_noise(batch: &MatrixBatch, noise: &[CMatrix], params: &AlccParams) -> Result<ShareSet> {
    params.validate()?;
    check_batch(batch, params)?;
    encode_rows(batch, noise, params)
}

/// Encodes a horizontal slice of the batch. Encoding acts entrywise, so the
/// shares of a row slice are the same rows of the full shares; `params.m`
/// is not checked.
pub fn encode_rows(batch: &MatrixBatch, noise: &[CMatrix], params: &AlccParams) -> Result<ShareSet> {
    params.validate()?;
    if batch.len() != params.k || batch.dims().1 != params.n {
        return Err(Error::DimensionMismatch(format!(
            "expected {} matrices with {} columns",
            params.k, params.n
        )));
    }
    check_range(batch, params.r)?;
    let (m, n) = batch.dims();
    if noise.len() != params.t || noise.iter().any(|z| z.dims() != (m, n)) {
        return Err(Error::DimensionMismatch(format!(
            "expected {} noise blocks of {m}x{n}",
            params.t
        )));
    }
    let coef = coefficients(batch, noise, params)?;
    let kk = params.big_k();
    let alphas: Vec<Complex64> = (1..=params.n_workers())
        .map(|i| params.alpha_point(i))
        .collect::<Result<_>>()?;
    let values = exec::map_slice(&alphas, |&a| {
        let data = coef
            .chunks_exact(kk)
            .map(|c| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * a + v))
            .collect();
        CMatrix::from_vec(m, n, data).expect("share shape")
    });
    Ok(ShareSet {
        params_fingerprint: params.fingerprint(),
        shares: values
            .into_iter()
            .enumerate()
            .map(|(i, value)| Share { worker: i + 1, value })
            .collect(),
    })
}

const POSITION_BLOCK: usize = 256;

/// Coefficients of `u(z)` stored position-major: entry `p·K + l` holds the
/// `z^l` coefficient `W̃_l/(K·β^l)` at matrix position `p`.
fn coefficients(batch: &MatrixBatch, noise: &[CMatrix], params: &AlccParams) -> Result<Vec<Complex64>> {
    let kk = params.big_k();
    let plan = DftPlan::new(kk)?;
    let scale: Vec<f64> = (0..kk)
        .map(|l| 1.0 / (kk as f64 * params.beta.powi(l as i32)))
        .collect();
    let npos = batch.dims().0 * batch.dims().1;
    let mut coef = vec![Complex64::new(0.0, 0.0); npos * kk];
    exec::for_each_chunk_mut(&mut coef, kk * POSITION_BLOCK, |blk, chunk| {
        let mut w = vec![Complex64::new(0.0, 0.0); kk];
        for (local, out) in chunk.chunks_exact_mut(kk).enumerate() {
            let p = blk * POSITION_BLOCK + local;
            for (j, x) in batch.matrices().iter().enumerate() {
                w[j] = Complex64::new(x.as_slice()[p], 0.0);
            }
            for (j, z) in noise.iter().enumerate() {
                w[params.k + j] = z.as_slice()[p];
            }
            plan.forward(&w, out);
            for (o, s) in out.iter_mut().zip(&scale) {
                *o *= *s;
            }
        }
    });
    Ok(coef)
}
