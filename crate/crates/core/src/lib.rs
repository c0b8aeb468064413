//! Analog Lagrange coded computing (ALCC).
//!
//! A master holding a batch `X_1, …, X_k` of real matrices wants `f(X_j)` for
//! a degree-`D` polynomial `f`, computed by `N` workers of which any `t` may
//! collude and up to `s` may never answer. ALCC encodes the batch together
//! with `t` Gaussian noise blocks into a Lagrange polynomial over the complex
//! plane, hands each worker one evaluation of it, and interpolates the
//! workers' answers back, all in floating point.
//!
//! * [`numerics`]: complex matrices, DFT, Vandermonde solves, conditioning, sampling.
//! * [`alcc`]: parameters, Lagrange monomials, share encoding and decoding.
//! * [`polyfun`]: the polynomial `f`, as a matrix expression or explicit monomials.
//! * [`privacy`]: mutual-information and distinguishing-security bounds.
//! * [`accuracy`]: floating-point error bounds and the fixed-point comparison bounds.
//! * [`lcc`]: the finite-field fixed-point baseline.
//! * [`simulator`]: in-process master/worker experiments and sweeps.

pub mod accuracy;
pub mod alcc;
pub mod error;
pub mod exec;
pub mod lcc;
pub mod numerics;
pub mod polyfun;
pub mod privacy;
pub mod simulator;

pub use error::{Error, Result};
