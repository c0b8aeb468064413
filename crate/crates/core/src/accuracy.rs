//! Closed-form error bounds: the floating-point ALCC upper bound and the
//! fixed-point LCC lower bounds on the quantization step.
//!
//! All bounds drop the `O(1/σ_n)` remainder; reports say so.

use serde::{Deserialize, Serialize};

use crate::alcc::{decoding_matrix, AlccParams};
use crate::error::{invalid, Error, Result};
use crate::numerics::singular_values;
use crate::polyfun::PolyFn;

/// Bits taken by exponent, sign and zero flag in a `b`-bit float.
pub const NON_MANTISSA_BITS: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Any entrywise polynomial; carries the `(mne)^D` factor.
    General,
    /// Matrix polynomials; `(mne)^D` becomes `max(m, n)^D`.
    MatrixPoly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub kind: BoundKind,
    /// Upper bound on the absolute error of any output entry.
    pub alcc_upper_bound: f64,
    pub beta_bar: f64,
    pub kappa_b: f64,
    pub lambda_min: f64,
    pub degree: usize,
    pub c: f64,
    pub s_a: f64,
    /// Lower bound on `Δ` with intermediate products reduced mod `p`.
    pub lcc_lower_bound_case1: f64,
    /// Lower bound on `Δ` with one reduction at the end.
    pub lcc_lower_bound_case2: f64,
    pub b: u32,
    pub b_m: u32,
    pub workers: Vec<usize>,
    pub remainder_dropped: bool,
}

/// `β̄ = (β^{D̃+2} − 1)/(β² − 1)`, with the limit `D̃/2 + 1` at `β = 1`.
pub fn beta_bar(beta: f64, d_tilde: usize) -> f64 {
    let lb = beta.ln();
    if lb == 0.0 {
        return d_tilde as f64 / 2.0 + 1.0;
    }
    ((d_tilde as f64 + 2.0) * lb).exp_m1() / (2.0 * lb).exp_m1()
}

/// `Ñ^{s+6}` with `Ñ` the smallest odd integer above `N`. Shape only: the
/// constant of the asymptotic bound is taken as 1.
pub fn kappa_straggler_bound(n: usize, s: usize) -> f64 {
    let odd = if n % 2 == 0 { n + 1 } else { n + 2 };
    (odd as f64).powi(s as i32 + 6)
}

/// Lower bounds on the LCC quantization step for a degree-`D` polynomial
/// with coefficient sum `s_a`, data bound `r` and `b`-bit words:
/// `(s_a r^D / 2^{b/2−1})^{1/(D+1)}` and
/// `(s_a^{1+1/D} r^D / 2^{b/D−1})^{D/(D²+D+1)}`.
pub fn lcc_step_lower_bounds(degree: usize, s_a: f64, r: f64, b: u32) -> (f64, f64) {
    let d = degree as f64;
    let b = b as f64;
    let log_case1 = (s_a.log2() + d * r.log2() - (b / 2.0 - 1.0)) / (d + 1.0);
    let log_case2 = ((1.0 + 1.0 / d) * s_a.log2() + d * r.log2() - (b / d - 1.0)) * d / (d * d + d + 1.0);
    (log_case1.exp2(), log_case2.exp2())
}

/// [`lcc_step_lower_bounds`] with `D` and `s_a` taken from `f` on an `m × n` input.
pub fn lcc_error_lower_bounds(f: &PolyFn, m: usize, n: usize, r: f64, b: u32) -> Result<(f64, f64)> {
    let pb = f.degree_and_bounds(m, n)?;
    Ok(lcc_step_lower_bounds(pb.degree, pb.s_a, r, b))
}

/// Absolute-error bound for ALCC with `b`-bit floats (`b_m = b − 10`
/// mantissa bits). `workers` selects the answers used for decoding; the
/// `D̃ + 1` lowest indices by default.
pub fn alcc_error_bound(
    params: &AlccParams,
    f: &PolyFn,
    kind: BoundKind,
    workers: Option<&[usize]>,
    b: u32,
) -> Result<AccuracyReport> {
    params.validate()?;
    if b <= NON_MANTISSA_BITS {
        return Err(invalid("b", format!("need more than {NON_MANTISSA_BITS} bits, got {b}")));
    }
    if f.degree() != params.degree {
        return Err(Error::DimensionMismatch(format!(
            "polynomial has degree {}, parameters say {}",
            f.degree(),
            params.degree
        )));
    }
    let pb = f.degree_and_bounds(params.m, params.n)?;
    let default: Vec<usize> = (1..=params.d_tilde() + 1).collect();
    let workers = workers.unwrap_or(&default);
    let sv = singular_values(&decoding_matrix(workers, params)?);
    let lambda_max = sv[0];
    let lambda_min = *sv.last().expect("nonempty");
    if !(lambda_min > 0.0) {
        return Err(Error::SingularSystem);
    }
    let kappa_b = lambda_max / lambda_min;

    let d = params.degree as f64;
    let (m, n) = (params.m as f64, params.n as f64);
    let size = match kind {
        BoundKind::General => m * n * std::f64::consts::E,
        BoundKind::MatrixPoly => m.max(n),
    };
    let bb = beta_bar(params.beta, params.d_tilde());
    let amplitude = params.k as f64 * params.r + params.t as f64 * params.theta * params.sigma_n;
    let log2_const = bb.log2() + pb.c.log2() + d * size.log2() - lambda_min.log2()
        + 0.5 * ((params.d_tilde() + 1) as f64).log2()
        + d * amplitude.log2()
        + kappa_b.log2();
    let b_m = b - NON_MANTISSA_BITS;
    // Scaling by an exact power of two keeps bound(b + 1) = bound(b)/2 exact.
    let alcc_upper_bound = log2_const.exp2() * 2f64.powi(-(b_m as i32));
    let (case1, case2) = lcc_step_lower_bounds(pb.degree, pb.s_a, params.r, b);
    Ok(AccuracyReport {
        kind,
        alcc_upper_bound,
        beta_bar: bb,
        kappa_b,
        lambda_min,
        degree: pb.degree,
        c: pb.c,
        s_a: pb.s_a,
        lcc_lower_bound_case1: case1,
        lcc_lower_bound_case2: case2,
        b,
        b_m,
        workers: workers.to_vec(),
        remainder_dropped: true,
    })
}
