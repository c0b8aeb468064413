//! Numerical foundation: dense complex matrices, the DFT, Vandermonde
//! systems and their conditioning, and truncated complex Gaussian sampling.

mod dft;
mod linalg;
mod matrix;
mod sampling;

pub use dft::{dft, idft, unit_root, DftPlan};
pub use linalg::{
    condition_number, lstsq, lstsq_vandermonde, matrix_condition_number, singular_values, solve_vandermonde,
    vandermonde,
};
pub use matrix::{
    add_in, matmul_in, scale_in, transpose_matmul_acc_in, transpose_matmul_in, CMatrix, ComplexRing, Matrix, RMatrix, RealRing, Ring,
};
pub use sampling::{
    mix_seed, rng_from_seed, sample_truncated_complex_gaussian, sample_truncated_with, ComplexGaussianSpec,
};
