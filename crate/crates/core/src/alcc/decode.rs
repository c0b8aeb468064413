use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::AlccParams;
use crate::error::{Error, Result};
use crate::numerics::{lstsq_vandermonde, solve_vandermonde, vandermonde, CMatrix, RMatrix};

/// A worker's answer `f(Y_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eval {
    pub worker: usize,
    pub value: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    pub results: Vec<Eval>,
    pub poly_degree: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Interpolate through the `D̃ + 1` lowest-indexed answers.
    #[default]
    Interpolate,
    /// Least-squares fit through every answer.
    LeastSquares,
}

#[derive(Clone, Debug)]
pub struct Decoded {
    /// Real parts of `f(u(β_j))` for `j = 1..=k`.
    pub outputs: Vec<RMatrix>,
    /// Largest discarded imaginary part over all outputs.
    pub imag_residue_max: f64,
    /// Workers whose answers entered the solve, ascending.
    pub used_workers: Vec<usize>,
}

fn check_indices(indices: &[usize], n_workers: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &i in indices {
        if i == 0 || i > n_workers {
            return Err(Error::IndexOutOfRange { index: i, max: n_workers });
        }
        if !seen.insert(i) {
            return Err(Error::DuplicateWorker(i));
        }
    }
    Ok(())
}

pub fn decode(evals: &EvalSet, params: &AlccParams, output_dims: (usize, usize)) -> Result<Decoded> {
    decode_with(evals, params, output_dims, DecodeMode::Interpolate)
}

pub fn decode_with(
    evals: &EvalSet,
    params: &AlccParams,
    output_dims: (usize, usize),
    mode: DecodeMode,
) -> Result<Decoded> {
    params.validate()?;
    if evals.poly_degree != params.degree {
        return Err(Error::DimensionMismatch(format!(
            "answers are for degree {}, parameters say {}",
            evals.poly_degree, params.degree
        )));
    }
    let indices: Vec<usize> = evals.results.iter().map(|e| e.worker).collect();
    check_indices(&indices, params.n_workers())?;
    let needed = params.d_tilde() + 1;
    if indices.len() < needed {
        return Err(Error::InsufficientWorkers { needed, got: indices.len() });
    }
    if let Some(e) = evals.results.iter().find(|e| e.value.dims() != output_dims) {
        return Err(Error::DimensionMismatch(format!(
            "worker {} returned {}x{}, expected {}x{}",
            e.worker,
            e.value.rows(),
            e.value.cols(),
            output_dims.0,
            output_dims.1
        )));
    }

    let mut order: Vec<&Eval> = evals.results.iter().collect();
    order.sort_by_key(|e| e.worker);
    if mode == DecodeMode::Interpolate {
        order.truncate(needed);
    }
    let nodes: Vec<Complex64> = order
        .iter()
        .map(|e| params.alpha_point(e.worker))
        .collect::<Result<_>>()?;
    let (u, h) = output_dims;
    let mut rhs = CMatrix::zeros(order.len(), u * h);
    for (row, e) in order.iter().enumerate() {
        rhs.as_mut_slice()[row * u * h..(row + 1) * u * h].copy_from_slice(e.value.as_slice());
    }
    let coef = match mode {
        DecodeMode::Interpolate => solve_vandermonde(&nodes, &rhs)?,
        DecodeMode::LeastSquares => lstsq_vandermonde(&nodes, needed, &rhs)?,
    };

    let mut imag_residue_max = 0.0f64;
    let mut outputs = Vec::with_capacity(params.k);
    for j in 1..=params.k {
        let bj = params.beta_point(j)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); u * h];
        for l in (0..needed).rev() {
            for (a, &c) in acc.iter_mut().zip(coef.row(l)) {
                *a = *a * bj + c;
            }
        }
        imag_residue_max = acc.iter().fold(imag_residue_max, |m, z| m.max(z.im.abs()));
        outputs.push(RMatrix::from_vec(u, h, acc.iter().map(|z| z.re).collect())?);
    }
    Ok(Decoded {
        outputs,
        imag_residue_max,
        used_workers: order.iter().map(|e| e.worker).collect(),
    })
}

/// The `(D̃+1) × (D̃+1)` interpolation matrix with rows
/// `(1, α_i, α_i², …, α_i^{D̃})` for the given workers.
pub fn decoding_matrix(indices: &[usize], params: &AlccParams) -> Result<CMatrix> {
    params.validate()?;
    let needed = params.d_tilde() + 1;
    if indices.len() != needed {
        return Err(Error::DimensionMismatch(format!(
            "decoding matrix needs exactly {needed} workers, got {}",
            indices.len()
        )));
    }
    check_indices(indices, params.n_workers())?;
    let nodes: Vec<Complex64> = indices
        .iter()
        .map(|&i| params.alpha_point(i))
        .collect::<Result<_>>()?;
    Ok(vandermonde(&nodes, needed))
}
