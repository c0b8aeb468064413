//! The ALCC protocol: Lagrange encoding over the complex plane, worker
//! answers, and interpolation back to `f(X_1), …, f(X_k)`.
//!
//! Interpolation points sit on a circle, `β_j = β·exp(2πi(j−1)/(k+t))`, and
//! workers evaluate at the `N`-th roots of unity `α_i = exp(2πi(i−1)/N)`.
//! On that constellation the Lagrange basis collapses to a geometric sum and
//! encoding is a length-`(k+t)` DFT per matrix entry.

mod decode;
mod encode;
mod params;
mod wire;

pub use decode::{decode, decode_with, decoding_matrix, DecodeMode, Decoded, Eval, EvalSet};
pub use encode::{encode, encode_rows, encode_with_noise, sample_noise, MatrixBatch, NoiseStreams, Share, ShareSet};
pub use params::{lagrange_monomial, AlccParams};
pub use wire::{WireHeader, EVALS_FORMAT, SHARES_FORMAT};
