use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RMatrix = Matrix<f64>;
pub type CMatrix = Matrix<Complex64>;

impl<T: Copy> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn to_complex(&self) -> CMatrix {
        self.map(|x| Complex64::new(x, 0.0))
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, Complex64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn re(&self) -> RMatrix {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> RMatrix {
        self.map(|z| z.im)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dims(self, other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        matmul_in(&ComplexRing, self, other)
    }
}

fn same_dims<A, B>(a: &Matrix<A>, b: &Matrix<B>) -> Result<()> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Rings
// ---------------------------------------------------------------------------

/// Scalar arithmetic a polynomial can be evaluated in.
///
/// Kernels accumulate with [`Ring::mul_add_raw`] and call [`Ring::reduce`]
/// at least every [`Ring::lazy_steps`] accumulations; rings with exact
/// wrap-free arithmetic use that to batch modular reductions.
pub trait Ring: Sync {
    type Elem: Copy + Send + Sync + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;

    /// Embeds a real polynomial coefficient.
    fn coefficient(&self, c: f64) -> Result<Self::Elem>;

    #[inline]
    fn mul_add_raw(&self, acc: Self::Elem, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.add(acc, self.mul(a, b))
    }

    #[inline]
    fn reduce(&self, acc: Self::Elem) -> Self::Elem {
        acc
    }

    fn lazy_steps(&self) -> usize {
        usize::MAX
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexRing;

impl Ring for ComplexRing {
    type Elem = Complex64;

    #[inline]
    fn zero(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn add(&self, a: Complex64, b: Complex64) -> Complex64 {
        a + b
    }
    #[inline]
    fn mul(&self, a: Complex64, b: Complex64) -> Complex64 {
        a * b
    }
    fn coefficient(&self, c: f64) -> Result<Complex64> {
        Ok(Complex64::new(c, 0.0))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RealRing;

impl Ring for RealRing {
    type Elem = f64;

    #[inline]
    fn zero(&self) -> f64 {
        0.0
    }
    #[inline]
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    #[inline]
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn coefficient(&self, c: f64) -> Result<f64> {
        Ok(c)
    }
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------
//
// Every output entry is accumulated in a fixed sequential order over the
// contraction index; parallelism only splits output rows, so results do not
// depend on the thread count.

const ROW_BLOCK: usize = 8;

pub fn add_in<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Result<Matrix<R::Elem>> {
    same_dims(a, b)?;
    Ok(Matrix {
        rows: a.rows,
        cols: a.cols,
        data: a
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| ring.add(x, y))
            .collect(),
    })
}

pub fn scale_in<R: Ring>(ring: &R, s: R::Elem, a: &Matrix<R::Elem>) -> Matrix<R::Elem> {
    Matrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().map(|&x| ring.mul(s, x)).collect(),
    }
}

/// `a · b`.
pub fn matmul_in<R: Ring>(ring: &R, a: &Matrix<R::Elem>, b: &Matrix<R::Elem>) -> Result<Matrix<R::Elem>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (n, inner) = (b.cols, a.cols);
    let mut out = Matrix::filled(a.rows, n, ring.zero());
    if n == 0 {
        return Ok(out);
    }
    let lazy = ring.lazy_steps().max(1);
    exec::for_each_chunk_mut(&mut out.data, n * ROW_BLOCK, |blk, chunk| {
        for (local, orow) in chunk.chunks_mut(n).enumerate() {
            let i = blk * ROW_BLOCK + local;
            let arow = a.row(i);
            for (k, &aik) in arow.iter().enumerate().take(inner) {
                for (o, &bkj) in orow.iter_mut().zip(b.row(k)) {
                    *o = ring.mul_add_raw(*o, aik, bkj);
                }
                if (k + 1) % lazy == 0 {
                    orow.iter_mut().for_each(|o| *o = ring.reduce(*o));
                }
            }
            orow.iter_mut().for_each(|o| *o = ring.reduce(*o));
        }
    });
    Ok(out)
}

/// `aᵀ · b`, accumulated row by row over the shared leading dimension.
/// When `a` and `b` are the same matrix only the upper triangle is computed
/// and mirrored.
pub fn transpose_matmul_in<R: Ring>(
    ring: &R,
    a: &Matrix<R::Elem>,
    b: &Matrix<R::Elem>,
) -> Result<Matrix<R::Elem>> {
    let mut out = Matrix::filled(a.cols, b.cols, ring.zero());
    transpose_matmul_acc_in(ring, a, b, &mut out)?;
    Ok(out)
}

/// `out += aᵀ · b`, continuing each entry's running sum in row order, so
/// feeding `a` in consecutive row slices gives the same bits as one call
/// on the whole matrix.
pub fn transpose_matmul_acc_in<R: Ring>(
    ring: &R,
    a: &Matrix<R::Elem>,
    b: &Matrix<R::Elem>,
    out: &mut Matrix<R::Elem>,
) -> Result<()> {
    if a.rows != b.rows || out.dims() != (a.cols, b.cols) {
        return Err(Error::DimensionMismatch(format!(
            "cannot accumulate ({}x{})ᵀ · {}x{} into {}x{}",
            a.rows, a.cols, b.rows, b.cols, out.rows, out.cols
        )));
    }
    let symmetric = std::ptr::eq(a, b) || a == b;
    let (u, h, depth) = (a.cols, b.cols, a.rows);
    if h == 0 {
        return Ok(());
    }
    let lazy = ring.lazy_steps().max(1);
    exec::for_each_chunk_mut(&mut out.data, h * ROW_BLOCK, |blk, chunk| {
        let first = blk * ROW_BLOCK;
        let nrows = chunk.len() / h;
        for r in 0..depth {
            let arow = a.row(r);
            let brow = b.row(r);
            for local in 0..nrows {
                let i = first + local;
                let ari = arow[i];
                let start = if symmetric { i } else { 0 };
                let orow = &mut chunk[local * h + start..(local + 1) * h];
                for (o, &brj) in orow.iter_mut().zip(&brow[start..]) {
                    *o = ring.mul_add_raw(*o, ari, brj);
                }
            }
            if (r + 1) % lazy == 0 {
                chunk.iter_mut().for_each(|o| *o = ring.reduce(*o));
            }
        }
        chunk.iter_mut().for_each(|o| *o = ring.reduce(*o));
    });
    if symmetric {
        for i in 0..u {
            for j in 0..i {
                let v = out.data[j * h + i];
                out.data[i * h + j] = v;
            }
        }
    }
    Ok(())
}
