//! Fixed-point Lagrange coded computing over a prime field, the baseline
//! ALCC is compared against.
//!
//! Data is quantized with step `Δ`, mapped into `F_p` with negatives as
//! `p − |q|`, Lagrange-encoded with uniform field noise, evaluated by the
//! workers either fully modulo `p` or in wrapping `b`-bit integers with a
//! single final reduction, then interpolated and lifted back to reals.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alcc::MatrixBatch;
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::numerics::{rng_from_seed, Matrix, RMatrix, Ring};
use crate::polyfun::PolyFn;

// ---------------------------------------------------------------------------
// Primes
// ---------------------------------------------------------------------------

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &q in &BASES {
        if n % q == 0 {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn largest_prime_at_most(n: u64) -> Option<u64> {
    (2..=n).rev().find(|&q| is_prime(q))
}

// ---------------------------------------------------------------------------
// Field parameters and rings
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntermediateMode {
    /// Every product is reduced modulo `p`; needs `p² ≤ 2^b`.
    Modular,
    /// Workers compute in wrapping `b`-bit integers and reduce once.
    IntegerOnce,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u64,
    pub b: u32,
    pub delta: f64,
    pub mode: IntermediateMode,
}

impl FieldParams {
    pub fn new(p: u64, b: u32, delta: f64, mode: IntermediateMode) -> Result<Self> {
        if !(12..=64).contains(&b) {
            return Err(invalid("b", format!("must lie in 12..=64, got {b}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("delta", format!("must be positive, got {delta}")));
        }
        if p >= 1 << 62 {
            return Err(invalid("p", "must be below 2^62"));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if (p as u128) >> b != 0 {
            return Err(invalid("p", format!("{p} does not fit in {b} bits")));
        }
        if mode == IntermediateMode::Modular && (p as u128) * (p as u128) > 1u128 << b {
            return Err(invalid("p", format!("p² exceeds 2^{b} with modular intermediates")));
        }
        Ok(Self { p, b, delta, mode })
    }

    /// Largest prime allowed by the word size: `p² ≤ 2^b` for modular
    /// intermediates, `(s_a/Δ)·p^D ≤ 2^b` otherwise.
    pub fn for_bits(b: u32, delta: f64, mode: IntermediateMode, degree: usize, s_a: f64) -> Result<Self> {
        let cap = match mode {
            IntermediateMode::Modular => 2f64.powf(b as f64 / 2.0),
            IntermediateMode::IntegerOnce => ((b as f64 - (s_a / delta).log2()) / degree as f64).exp2(),
        };
        let cap = cap.floor().min((1u64 << 62) as f64 - 1.0);
        let p = largest_prime_at_most(cap as u64).ok_or_else(|| invalid("b", "leaves no room for a prime field"))?;
        Self::new(p, b, delta, mode)
    }

    /// Whether `f` with coefficient sum `s_a` can run without wrapping the
    /// `b`-bit words in this mode.
    pub fn capacity_ok(&self, degree: usize, s_a: f64) -> bool {
        match self.mode {
            IntermediateMode::Modular => (self.p as f64).powi(2) <= 2f64.powi(self.b as i32),
            IntermediateMode::IntegerOnce => {
                (s_a / self.delta).log2() + degree as f64 * (self.p as f64).log2() <= self.b as f64
            }
        }
    }

    fn mask(&self) -> u64 {
        if self.b == 64 {
            u64::MAX
        } else {
            (1u64 << self.b) - 1
        }
    }

    fn to_field(&self, v: i128) -> u64 {
        v.rem_euclid(self.p as i128) as u64
    }

    /// Signed lift: residues above `p/2` are negative.
    pub fn lift(&self, v: u64) -> i64 {
        if v > self.p / 2 {
            v as i64 - self.p as i64
        } else {
            v as i64
        }
    }
}

/// Overflow criterion: `(s_a/Δ)·(r/Δ)^D > p/2`.
pub fn overflow_criterion_violated(field: &FieldParams, degree: usize, s_a: f64, r: f64) -> bool {
    let lhs = (s_a / field.delta).log2() + degree as f64 * (r / field.delta).log2();
    lhs > (field.p as f64 / 2.0).log2()
}

fn coefficient_integer(c: f64) -> Result<i128> {
    if c.fract() != 0.0 || !c.is_finite() || c.abs() >= 2f64.powi(100) {
        return Err(Error::NonIntegerCoefficient(c));
    }
    Ok(c as i128)
}

/// `F_p`, with products accumulated unreduced while they fit in a `u64`.
#[derive(Clone, Copy, Debug)]
pub struct ModRing {
    p: u64,
    lazy: usize,
}

impl ModRing {
    pub fn new(p: u64) -> Self {
        let q = (p - 1) as u128;
        let lazy = if q * q >= u64::MAX as u128 {
            1
        } else {
            ((u64::MAX as u128 - q) / (q * q).max(1)).clamp(1, 1 << 20) as usize
        };
        Self { p, lazy }
    }
}

impl Ring for ModRing {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }
    fn coefficient(&self, c: f64) -> Result<u64> {
        Ok(coefficient_integer(c)?.rem_euclid(self.p as i128) as u64)
    }
    #[inline]
    fn mul_add_raw(&self, acc: u64, a: u64, b: u64) -> u64 {
        if self.lazy > 1 {
            acc + a * b
        } else {
            self.add(acc % self.p, self.mul(a, b))
        }
    }
    #[inline]
    fn reduce(&self, acc: u64) -> u64 {
        acc % self.p
    }
    fn lazy_steps(&self) -> usize {
        self.lazy
    }
}

/// Unsigned integers modulo `2^b`: fixed-width words that silently wrap.
#[derive(Clone, Copy, Debug)]
pub struct WrapRing {
    mask: u64,
    p: u64,
}

impl Ring for WrapRing {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        a.wrapping_add(b) & self.mask
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        a.wrapping_mul(b) & self.mask
    }
    fn coefficient(&self, c: f64) -> Result<u64> {
        Ok(coefficient_integer(c)?.rem_euclid(self.p as i128) as u64)
    }
}

/// Exact signed integers, for reference computations on quantized data.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntRing;

impl Ring for IntRing {
    type Elem = i128;

    fn zero(&self) -> i128 {
        0
    }
    #[inline]
    fn add(&self, a: i128, b: i128) -> i128 {
        a + b
    }
    #[inline]
    fn mul(&self, a: i128, b: i128) -> i128 {
        a * b
    }
    fn coefficient(&self, c: f64) -> Result<i128> {
        coefficient_integer(c)
    }
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedBatch {
    /// Field representatives of `round(x/Δ)`.
    pub matrices: Vec<Matrix<u64>>,
    pub delta: f64,
    pub p: u64,
    /// Some `|round(x/Δ)|` reached `p/2` and aliased.
    pub input_overflow: bool,
    /// Largest `|x|` in the batch.
    pub max_abs: f64,
}

/// `round(x/Δ)` with halves away from zero.
pub fn quantize_value(x: f64, delta: f64) -> i128 {
    (x / delta).round() as i128
}

pub fn quantize(batch: &MatrixBatch, field: &FieldParams) -> QuantizedBatch {
    let half = (field.p / 2) as i128;
    let mut input_overflow = false;
    let matrices = batch
        .matrices()
        .iter()
        .map(|x| {
            x.map(|v| {
                let q = quantize_value(v, field.delta);
                input_overflow |= q.abs() > half;
                field.to_field(q)
            })
        })
        .collect();
    QuantizedBatch {
        matrices,
        delta: field.delta,
        p: field.p,
        input_overflow,
        max_abs: batch.max_abs(),
    }
}

impl QuantizedBatch {
    /// The quantized integers, lifted back from the field.
    pub fn signed(&self) -> Vec<Matrix<i128>> {
        let half = self.p / 2;
        self.matrices
            .iter()
            .map(|m| m.map(|v| if v > half { v as i128 - self.p as i128 } else { v as i128 }))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct LccShare {
    pub worker: usize,
    pub value: Matrix<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LccShareSet {
    pub field: FieldParams,
    pub k: usize,
    pub t: usize,
    pub n_workers: usize,
    pub data_bound: f64,
    pub input_overflow: bool,
    pub shares: Vec<LccShare>,
}

/// Interpolation points `1..=k+t`.
fn beta_points(k: usize, t: usize) -> Vec<u64> {
    (1..=(k + t) as u64).collect()
}

/// Evaluation point of worker `i` (1-based): `k + t + i`.
fn alpha_point(k: usize, t: usize, i: usize) -> u64 {
    (k + t + i) as u64
}

/// `L_j(z)` for the Lagrange basis on `nodes`, for every `j`.
fn lagrange_basis_at(nodes: &[u64], z: u64, p: u64) -> Vec<u64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let (mut num, mut den) = (1u64, 1u64);
            for (l, &xl) in nodes.iter().enumerate() {
                if l != j {
                    num = mul_mod(num, (z + p - xl) % p, p);
                    den = mul_mod(den, (xj + p - xl) % p, p);
                }
            }
            mul_mod(num, pow_mod(den, p - 2, p), p)
        })
        .collect()
}

pub fn lcc_encode(
    q: &QuantizedBatch,
    k: usize,
    t: usize,
    n_workers: usize,
    field: &FieldParams,
    seed: u64,
) -> Result<LccShareSet> {
    if q.matrices.len() != k {
        return Err(Error::DimensionMismatch(format!("expected {k} blocks, got {}", q.matrices.len())));
    }
    if q.p != field.p {
        return Err(Error::DimensionMismatch("batch quantized for a different field".into()));
    }
    let needed = k + t + n_workers;
    if (needed as u64) >= field.p {
        return Err(Error::FieldTooSmall { p: field.p, needed });
    }
    let (rows, cols) = q.matrices[0].dims();
    let mut rng = rng_from_seed(seed);
    let noise: Vec<Matrix<u64>> = (0..t)
        .map(|_| Matrix::from_fn(rows, cols, |_, _| rng.random_range(0..field.p)))
        .collect();
    let blocks: Vec<&Matrix<u64>> = q.matrices.iter().chain(&noise).collect();
    let betas = beta_points(k, t);
    let ring = ModRing::new(field.p);
    let values = exec::map_range(n_workers, |w| {
        let coef = lagrange_basis_at(&betas, alpha_point(k, t, w + 1), field.p);
        let mut acc = vec![0u64; rows * cols];
        for (step, (c, blk)) in coef.iter().zip(&blocks).enumerate() {
            for (a, &v) in acc.iter_mut().zip(blk.as_slice()) {
                *a = ring.mul_add_raw(*a, *c, v);
            }
            if (step + 1) % ring.lazy_steps() == 0 {
                acc.iter_mut().for_each(|a| *a = ring.reduce(*a));
            }
        }
        acc.iter_mut().for_each(|a| *a = ring.reduce(*a));
        Matrix::from_vec(rows, cols, acc).expect("share shape")
    });
    Ok(LccShareSet {
        field: *field,
        k,
        t,
        n_workers,
        data_bound: q.max_abs,
        input_overflow: q.input_overflow,
        shares: values
            .into_iter()
            .enumerate()
            .map(|(w, value)| LccShare { worker: w + 1, value })
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// Worker evaluation and decoding
// ---------------------------------------------------------------------------

/// One worker's computation of `f` on its share, in the field's mode.
pub fn lcc_worker_eval(share: &Matrix<u64>, f: &PolyFn, field: &FieldParams) -> Result<Matrix<u64>> {
    match field.mode {
        IntermediateMode::Modular => f.eval_in(&ModRing::new(field.p), share),
        IntermediateMode::IntegerOnce => {
            let ring = WrapRing { mask: field.mask(), p: field.p };
            Ok(f.eval_in(&ring, share)?.map(|v| v % field.p))
        }
    }
}

#[derive(Clone, Debug)]
pub struct LccDecoded {
    /// Reconstructed `f(X_j)` in real units.
    pub outputs: Vec<RMatrix>,
    /// The overflow criterion failed for the data bound and `f`.
    pub overflow_flag: bool,
    pub input_overflow: bool,
    pub used_workers: Vec<usize>,
}

/// Runs the workers on every share present, interpolates over `F_p` from
/// the `(k+t−1)·D + 1` lowest-indexed answers and lifts the result.
pub fn lcc_eval_and_decode(shares: &LccShareSet, f: &PolyFn) -> Result<LccDecoded> {
    let field = &shares.field;
    if !f.is_homogeneous() {
        return Err(invalid("f", "the fixed-point baseline supports homogeneous polynomials only"));
    }
    let degree = f.degree();
    let needed = (shares.k + shares.t - 1) * degree + 1;
    let mut order: Vec<&LccShare> = shares.shares.iter().collect();
    order.sort_by_key(|s| s.worker);
    if let Some(w) = order.windows(2).find(|w| w[0].worker == w[1].worker) {
        return Err(Error::DuplicateWorker(w[0].worker));
    }
    if order.len() < needed {
        return Err(Error::InsufficientWorkers { needed, got: order.len() });
    }
    order.truncate(needed);
    let Some(first) = order.first() else {
        return Err(Error::InsufficientWorkers { needed, got: 0 });
    };
    let (m, n) = first.value.dims();
    let pb = f.degree_and_bounds(m, n)?;
    let answers = exec::map_slice(&order, |s| lcc_worker_eval(&s.value, f, field));
    let answers: Vec<Matrix<u64>> = answers.into_iter().collect::<Result<_>>()?;
    let nodes: Vec<u64> = order.iter().map(|s| alpha_point(shares.k, shares.t, s.worker)).collect();
    let (u, h) = answers[0].dims();
    let ring = ModRing::new(field.p);
    let scale = field.delta.powi(degree as i32);
    let mut outputs = Vec::with_capacity(shares.k);
    for &bj in beta_points(shares.k, shares.t).iter().take(shares.k) {
        let coef = lagrange_basis_at(&nodes, bj, field.p);
        let mut acc = vec![0u64; u * h];
        for (step, (c, a)) in coef.iter().zip(&answers).enumerate() {
            for (o, &v) in acc.iter_mut().zip(a.as_slice()) {
                *o = ring.mul_add_raw(*o, *c, v);
            }
            if (step + 1) % ring.lazy_steps() == 0 {
                acc.iter_mut().for_each(|o| *o = ring.reduce(*o));
            }
        }
        let data = acc.into_iter().map(|v| field.lift(ring.reduce(v)) as f64 * scale).collect();
        outputs.push(RMatrix::from_vec(u, h, data)?);
    }
    Ok(LccDecoded {
        outputs,
        overflow_flag: overflow_criterion_violated(field, degree, pb.s_a, shares.data_bound),
        input_overflow: shares.input_overflow,
        used_workers: order.iter().map(|s| s.worker).collect(),
    })
}

/// `f` applied to the quantized integers without any modular reduction.
pub fn exact_quantized_outputs(q: &QuantizedBatch, f: &PolyFn) -> Result<Vec<Matrix<i128>>> {
    q.signed().iter().map(|x| f.eval_in(&IntRing, x)).collect()
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

pub const LCC_SHARES_FORMAT: &str = "lcc-shares/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LccWireHeader {
    pub format: String,
    pub field: FieldParams,
    pub k: usize,
    pub t: usize,
    pub n_workers: usize,
    pub data_bound: f64,
    pub input_overflow: bool,
    pub rows: usize,
    pub cols: usize,
    pub workers: Vec<usize>,
}

impl LccShareSet {
    /// Header plus `ceil(b/8)`-byte little-endian words, one matrix per worker.
    pub fn to_wire(&self) -> (LccWireHeader, Vec<u8>) {
        let (rows, cols) = self.shares.first().map_or((0, 0), |s| s.value.dims());
        let width = self.field.b.div_ceil(8) as usize;
        let mut blob = Vec::with_capacity(self.shares.len() * rows * cols * width);
        for s in &self.shares {
            for v in s.value.as_slice() {
                blob.extend_from_slice(&v.to_le_bytes()[..width]);
            }
        }
        let header = LccWireHeader {
            format: LCC_SHARES_FORMAT.into(),
            field: self.field,
            k: self.k,
            t: self.t,
            n_workers: self.n_workers,
            data_bound: self.data_bound,
            input_overflow: self.input_overflow,
            rows,
            cols,
            workers: self.shares.iter().map(|s| s.worker).collect(),
        };
        (header, blob)
    }

    pub fn from_wire(h: &LccWireHeader, blob: &[u8]) -> Result<Self> {
        if h.format != LCC_SHARES_FORMAT {
            return Err(Error::Format(format!("expected `{LCC_SHARES_FORMAT}`, found `{}`", h.format)));
        }
        let field = FieldParams::new(h.field.p, h.field.b, h.field.delta, h.field.mode)?;
        let width = field.b.div_ceil(8) as usize;
        let per = h.rows * h.cols * width;
        if blob.len() != per * h.workers.len() {
            return Err(Error::Format(format!(
                "blob holds {} bytes, header implies {}",
                blob.len(),
                per * h.workers.len()
            )));
        }
        let mut shares = Vec::with_capacity(h.workers.len());
        for (idx, &worker) in h.workers.iter().enumerate() {
            let chunk = &blob[idx * per..(idx + 1) * per];
            let data = chunk
                .chunks_exact(width.max(1))
                .map(|w| {
                    let mut b = [0u8; 8];
                    b[..width].copy_from_slice(w);
                    u64::from_le_bytes(b)
                })
                .collect();
            shares.push(LccShare { worker, value: Matrix::from_vec(h.rows, h.cols, data)? });
        }
        Ok(Self {
            field,
            k: h.k,
            t: h.t,
            n_workers: h.n_workers,
            data_bound: h.data_bound,
            input_overflow: h.input_overflow,
            shares,
        })
    }

    pub fn save(&self, stem: &Path) -> Result<()> {
        let (h, b) = self.to_wire();
        fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&h)?)?;
        fs::write(stem.with_extension("bin"), b)?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let h: LccWireHeader = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
        Self::from_wire(&h, &fs::read(stem.with_extension("bin"))?)
    }
}
