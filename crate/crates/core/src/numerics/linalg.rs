//! Dense complex linear algebra for the small systems ALCC needs:
//! Vandermonde construction and solves, column-pivoted Householder QR least
//! squares, and one-sided Jacobi singular values.

use num_complex::Complex64;

use super::dft::{unit_root, DftPlan};
use super::matrix::CMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `B[i][j] = nodes[i]^j` for `j < ncols`.
pub fn vandermonde(nodes: &[Complex64], ncols: usize) -> CMatrix {
    let mut b = CMatrix::zeros(nodes.len(), ncols);
    for (i, &z) in nodes.iter().enumerate() {
        let mut p = Complex64::new(1.0, 0.0);
        for j in 0..ncols {
            b.set(i, j, p);
            p *= z;
        }
    }
    b
}

fn check_distinct(nodes: &[Complex64]) -> Result<()> {
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let scale = a.norm().max(b.norm()).max(1.0);
            if (a - b).norm() <= 4.0 * f64::EPSILON * scale {
                return Err(Error::SingularSystem);
            }
        }
    }
    Ok(())
}

/// True when `nodes[i] == exp(2πi·i/M)` for every `i`, to rounding.
fn are_ordered_roots_of_unity(nodes: &[Complex64]) -> bool {
    let m = nodes.len();
    nodes
        .iter()
        .enumerate()
        .all(|(i, z)| (z - unit_root(i as i64, m)).norm() <= 1e-15)
}

/// Solves the square Vandermonde system `B·V = rhs` with `B[i][j] = nodes[i]^j`.
///
/// When the nodes are the `M`-th roots of unity in natural order, `B` is
/// `√M` times a unitary matrix and the solve is `V = dft(rhs) / M` column by
/// column. Otherwise a column-pivoted QR solve is used.
pub fn solve_vandermonde(nodes: &[Complex64], rhs: &CMatrix) -> Result<CMatrix> {
    let m = nodes.len();
    if m == 0 {
        return Err(Error::EmptySystem);
    }
    if rhs.rows() != m {
        return Err(Error::DimensionMismatch(format!(
            "{m} nodes but right-hand side has {} rows",
            rhs.rows()
        )));
    }
    check_distinct(nodes)?;
    if are_ordered_roots_of_unity(nodes) {
        return Ok(scaled_dft_solve(rhs));
    }
    lstsq(&vandermonde(nodes, m), rhs)
}

/// Least-squares fit of degree `< ncols` polynomials through `nodes`
/// (`nodes.len() >= ncols`).
pub fn lstsq_vandermonde(nodes: &[Complex64], ncols: usize, rhs: &CMatrix) -> Result<CMatrix> {
    if nodes.is_empty() || ncols == 0 {
        return Err(Error::EmptySystem);
    }
    if nodes.len() < ncols {
        return Err(Error::DimensionMismatch(format!(
            "{} nodes cannot determine {ncols} coefficients",
            nodes.len()
        )));
    }
    check_distinct(nodes)?;
    lstsq(&vandermonde(nodes, ncols), rhs)
}

fn scaled_dft_solve(rhs: &CMatrix) -> CMatrix {
    let (m, c) = rhs.dims();
    let plan = DftPlan::new(m).expect("nonempty");
    let mut out = CMatrix::zeros(m, c);
    let mut col = vec![ZERO; m];
    let mut res = vec![ZERO; m];
    let inv = 1.0 / m as f64;
    for j in 0..c {
        for (i, v) in col.iter_mut().enumerate() {
            *v = rhs.get(i, j);
        }
        plan.forward(&col, &mut res);
        for (i, v) in res.iter().enumerate() {
            out.set(i, j, v * inv);
        }
    }
    out
}

/// 2-norm condition number of the square Vandermonde matrix on `nodes`.
pub fn condition_number(nodes: &[Complex64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptySystem);
    }
    check_distinct(nodes)?;
    matrix_condition_number(&vandermonde(nodes, nodes.len()))
}

pub fn matrix_condition_number(a: &CMatrix) -> Result<f64> {
    let sv = singular_values(a);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    if min <= 0.0 || !min.is_finite() {
        return Err(Error::SingularSystem);
    }
    Ok(max / min)
}

// ---------------------------------------------------------------------------
// QR least squares
// ---------------------------------------------------------------------------

/// Householder QR with column pivoting: `A·P = Q·R`.
struct PivotedQr {
    /// R in the upper triangle, Householder vectors below (unit leading entry implied).
    qr: CMatrix,
    /// `tau[k]` scales reflector `k`: `H = I − tau·v·vᴴ`.
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    fn new(a: &CMatrix) -> Self {
        let (m, n) = a.dims();
        let mut qr = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut tau = Vec::with_capacity(n.min(m));
        let mut colnorm: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| qr.get(i, j).norm_sqr()).sum())
            .collect();

        for k in 0..n.min(m) {
            let piv = (k..n)
                .max_by(|&x, &y| colnorm[x].total_cmp(&colnorm[y]))
                .unwrap_or(k);
            if piv != k {
                for i in 0..m {
                    let t = qr.get(i, k);
                    qr.set(i, k, qr.get(i, piv));
                    qr.set(i, piv, t);
                }
                colnorm.swap(k, piv);
                perm.swap(k, piv);
            }

            let norm = (k..m).map(|i| qr.get(i, k).norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                tau.push(0.0);
                continue;
            }
            let x0 = qr.get(k, k);
            let phase = if x0.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                x0 / x0.norm()
            };
            let alpha = -phase * norm;
            // v = x − α e1, normalized so v[0] = 1.
            let v0 = x0 - alpha;
            for i in k + 1..m {
                let vi = qr.get(i, k) / v0;
                qr.set(i, k, vi);
            }
            let vnorm2 = 1.0 + (k + 1..m).map(|i| qr.get(i, k).norm_sqr()).sum::<f64>();
            let t = 2.0 / vnorm2;
            tau.push(t);
            qr.set(k, k, alpha);

            for j in k + 1..n {
                let mut w = qr.get(k, j);
                for i in k + 1..m {
                    w += qr.get(i, k).conj() * qr.get(i, j);
                }
                w *= t;
                qr.set(k, j, qr.get(k, j) - w);
                for i in k + 1..m {
                    let v = qr.get(i, j) - qr.get(i, k) * w;
                    qr.set(i, j, v);
                }
                colnorm[j] = (k + 1..m).map(|i| qr.get(i, j).norm_sqr()).sum();
            }
        }
        Self { qr, tau, perm }
    }

    fn rank_ok(&self) -> bool {
        let (m, n) = self.qr.dims();
        let r00 = self.qr.get(0, 0).norm();
        if r00 == 0.0 {
            return false;
        }
        let tol = (m.max(n) as f64) * f64::EPSILON * r00;
        (0..n.min(m)).all(|k| self.qr.get(k, k).norm() > tol)
    }

    /// Overwrites `b` with `Qᴴ·b`.
    fn apply_qh(&self, b: &mut CMatrix) {
        let (m, _) = self.qr.dims();
        let c = b.cols();
        let mut w = vec![ZERO; c];
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            w.copy_from_slice(b.row(k));
            for i in k + 1..m {
                let vi = self.qr.get(i, k).conj();
                for (wj, &bij) in w.iter_mut().zip(b.row(i)) {
                    *wj += vi * bij;
                }
            }
            w.iter_mut().for_each(|x| *x *= t);
            for (j, &wj) in w.iter().enumerate() {
                b.set(k, j, b.get(k, j) - wj);
            }
            for i in k + 1..m {
                let vi = self.qr.get(i, k);
                for (j, &wj) in w.iter().enumerate() {
                    b.set(i, j, b.get(i, j) - vi * wj);
                }
            }
        }
    }
}

/// Minimum-residual solution of `A·X = B` for full-column-rank `A` (`m ≥ n`).
pub fn lstsq(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let (m, n) = a.dims();
    if m == 0 || n == 0 {
        return Err(Error::EmptySystem);
    }
    if b.rows() != m {
        return Err(Error::DimensionMismatch(format!(
            "system has {m} rows but right-hand side has {}",
            b.rows()
        )));
    }
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "underdetermined {m}x{n} system"
        )));
    }
    let qr = PivotedQr::new(a);
    if !qr.rank_ok() {
        return Err(Error::SingularSystem);
    }
    let mut y = b.clone();
    qr.apply_qh(&mut y);
    let c = b.cols();
    let mut x = CMatrix::zeros(n, c);
    // Back substitution on the leading n rows, then undo the permutation.
    for k in (0..n).rev() {
        let rkk = qr.qr.get(k, k);
        for j in 0..c {
            let mut s = y.get(k, j);
            for l in k + 1..n {
                s -= qr.qr.get(k, l) * y.get(l, j);
            }
            y.set(k, j, s / rkk);
        }
    }
    for (k, &p) in qr.perm.iter().enumerate() {
        for j in 0..c {
            x.set(p, j, y.get(k, j));
        }
    }
    if !x.is_finite() {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Singular values
// ---------------------------------------------------------------------------

/// Singular values in descending order, via one-sided (Hestenes) Jacobi.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let work = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let (m, n) = work.dims();
    // Column-major copy: columns are rotated in pairs.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..m).map(|i| work.get(i, j)).collect())
        .collect();

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                let alpha: f64 = cp.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cq.iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cp.iter().zip(cq.iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let xp = *x;
                    let yq = *y * phase.conj();
                    *x = xp * c - yq * s;
                    *y = xp * s + yq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
