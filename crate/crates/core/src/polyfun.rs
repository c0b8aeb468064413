//! The polynomial `f` each worker applies to its share.
//!
//! Two representations: a matrix expression tree (sums, products,
//! transposes, scalar and constant-matrix multiples of the input), and an
//! explicit list of monomials per output entry. Trees evaluate in matrix
//! time; the monomial form is what the coefficient bounds `c` and `s_a` are
//! defined on, and [`PolyFn::expand`] converts one into the other for small
//! inputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{add_in, matmul_in, scale_in, transpose_matmul_in, CMatrix, ComplexRing, Matrix, RMatrix, Ring};

/// Default cap on the number of monomials [`PolyFn::expand`] will produce.
pub const EXPANSION_BUDGET: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Input,
    Add { lhs: Box<Expr>, rhs: Box<Expr> },
    Matmul { lhs: Box<Expr>, rhs: Box<Expr> },
    Transpose { arg: Box<Expr> },
    Scale { factor: f64, arg: Box<Expr> },
    /// A constant real matrix (degree zero).
    Const { value: RMatrix },
}

impl Expr {
    pub fn add(lhs: Expr, rhs: Expr) -> Self {
        Expr::Add { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn matmul(lhs: Expr, rhs: Expr) -> Self {
        Expr::Matmul { lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn transpose(arg: Expr) -> Self {
        Expr::Transpose { arg: Box::new(arg) }
    }

    pub fn scale(factor: f64, arg: Expr) -> Self {
        Expr::Scale { factor, arg: Box::new(arg) }
    }

    /// `(min, max)` degree over all terms.
    fn degree_range(&self) -> (usize, usize) {
        match self {
            Expr::Input => (1, 1),
            Expr::Const { .. } => (0, 0),
            Expr::Transpose { arg } | Expr::Scale { arg, .. } => arg.degree_range(),
            Expr::Add { lhs, rhs } => {
                let (a, b) = (lhs.degree_range(), rhs.degree_range());
                (a.0.min(b.0), a.1.max(b.1))
            }
            Expr::Matmul { lhs, rhs } => {
                let (a, b) = (lhs.degree_range(), rhs.degree_range());
                (a.0 + b.0, a.1 + b.1)
            }
        }
    }

    fn dims(&self, m: usize, n: usize) -> Result<(usize, usize)> {
        match self {
            Expr::Input => Ok((m, n)),
            Expr::Const { value } => Ok(value.dims()),
            Expr::Scale { arg, .. } => arg.dims(m, n),
            Expr::Transpose { arg } => arg.dims(m, n).map(|(a, b)| (b, a)),
            Expr::Add { lhs, rhs } => {
                let (a, b) = (lhs.dims(m, n)?, rhs.dims(m, n)?);
                if a != b {
                    return Err(Error::DimensionMismatch(format!(
                        "cannot add {}x{} and {}x{}",
                        a.0, a.1, b.0, b.1
                    )));
                }
                Ok(a)
            }
            Expr::Matmul { lhs, rhs } => {
                let (a, b) = (lhs.dims(m, n)?, rhs.dims(m, n)?);
                if a.1 != b.0 {
                    return Err(Error::DimensionMismatch(format!(
                        "cannot multiply {}x{} by {}x{}",
                        a.0, a.1, b.0, b.1
                    )));
                }
                Ok((a.0, b.1))
            }
        }
    }

    fn eval_in<R: Ring>(&self, ring: &R, x: &Matrix<R::Elem>) -> Result<Matrix<R::Elem>> {
        match self {
            Expr::Input => Ok(x.clone()),
            Expr::Const { value } => {
                let data = value
                    .as_slice()
                    .iter()
                    .map(|&v| ring.coefficient(v))
                    .collect::<Result<_>>()?;
                Matrix::from_vec(value.rows(), value.cols(), data)
            }
            Expr::Scale { factor, arg } => Ok(scale_in(ring, ring.coefficient(*factor)?, &arg.eval_in(ring, x)?)),
            Expr::Transpose { arg } => Ok(arg.eval_in(ring, x)?.transpose()),
            Expr::Add { lhs, rhs } => add_in(ring, &lhs.eval_in(ring, x)?, &rhs.eval_in(ring, x)?),
            Expr::Matmul { lhs, rhs } => {
                if let Expr::Transpose { arg } = lhs.as_ref() {
                    let a = arg.eval_in(ring, x)?;
                    if **arg == **rhs {
                        return transpose_matmul_in(ring, &a, &a);
                    }
                    return transpose_matmul_in(ring, &a, &rhs.eval_in(ring, x)?);
                }
                matmul_in(ring, &lhs.eval_in(ring, x)?, &rhs.eval_in(ring, x)?)
            }
        }
    }

    fn expand(&self, m: usize, n: usize, budget: usize) -> Result<PolyMatrix> {
        let out = match self {
            Expr::Input => PolyMatrix {
                rows: m,
                cols: n,
                entries: (0..m * n)
                    .map(|p| BTreeMap::from([(vec![(p / n, p % n)], 1.0)]))
                    .collect(),
            },
            Expr::Const { value } => PolyMatrix {
                rows: value.rows(),
                cols: value.cols(),
                entries: value
                    .as_slice()
                    .iter()
                    .map(|&v| {
                        let mut p = Poly::new();
                        add_term(&mut p, Vec::new(), v);
                        p
                    })
                    .collect(),
            },
            Expr::Scale { factor, arg } => {
                let mut a = arg.expand(m, n, budget)?;
                for p in &mut a.entries {
                    let scaled: Poly = p.iter().map(|(k, &v)| (k.clone(), v * factor)).collect();
                    *p = scaled.into_iter().filter(|(_, v)| *v != 0.0).collect();
                }
                a
            }
            Expr::Transpose { arg } => {
                let a = arg.expand(m, n, budget)?;
                PolyMatrix {
                    rows: a.cols,
                    cols: a.rows,
                    entries: (0..a.rows * a.cols)
                        .map(|p| a.entries[(p % a.rows) * a.cols + p / a.rows].clone())
                        .collect(),
                }
            }
            Expr::Add { lhs, rhs } => {
                let (a, b) = (lhs.expand(m, n, budget)?, rhs.expand(m, n, budget)?);
                if (a.rows, a.cols) != (b.rows, b.cols) {
                    return Err(Error::DimensionMismatch("addition of mismatched shapes".into()));
                }
                let entries = a
                    .entries
                    .into_iter()
                    .zip(b.entries)
                    .map(|(mut p, q)| {
                        for (k, v) in q {
                            add_term(&mut p, k, v);
                        }
                        p
                    })
                    .collect();
                PolyMatrix { rows: a.rows, cols: a.cols, entries }
            }
            Expr::Matmul { lhs, rhs } => {
                let (a, b) = (lhs.expand(m, n, budget)?, rhs.expand(m, n, budget)?);
                if a.cols != b.rows {
                    return Err(Error::DimensionMismatch("product of mismatched shapes".into()));
                }
                let mut entries = Vec::with_capacity(a.rows * b.cols);
                let mut work = 0usize;
                for i in 0..a.rows {
                    for j in 0..b.cols {
                        let mut p = Poly::new();
                        for l in 0..a.cols {
                            let (x, y) = (&a.entries[i * a.cols + l], &b.entries[l * b.cols + j]);
                            work += x.len() * y.len();
                            if work > budget.saturating_mul(16) {
                                return Err(Error::ExpansionTooLarge(budget));
                            }
                            for (kx, vx) in x {
                                for (ky, vy) in y {
                                    let mut key = kx.clone();
                                    key.extend_from_slice(ky);
                                    key.sort_unstable();
                                    add_term(&mut p, key, vx * vy);
                                }
                            }
                        }
                        entries.push(p);
                    }
                }
                PolyMatrix { rows: a.rows, cols: b.cols, entries }
            }
        };
        if out.entries.iter().map(BTreeMap::len).sum::<usize>() > budget {
            return Err(Error::ExpansionTooLarge(budget));
        }
        Ok(out)
    }
}

type Poly = BTreeMap<Vec<(usize, usize)>, f64>;

fn add_term(p: &mut Poly, key: Vec<(usize, usize)>, v: f64) {
    let e = p.entry(key).or_insert(0.0);
    *e += v;
    if *e == 0.0 {
        p.retain(|_, c| *c != 0.0);
    }
}

struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

/// `coef · Π x[i][j]` over the listed input positions (repeats are powers).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub vars: Vec<(usize, usize)>,
}

/// Explicit multivariate polynomial per output entry, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntrywisePoly {
    pub input_dims: (usize, usize),
    pub output_dims: (usize, usize),
    pub entries: Vec<Vec<Monomial>>,
}

impl EntrywisePoly {
    fn check(&self) -> Result<()> {
        let (u, h) = self.output_dims;
        if self.entries.len() != u * h {
            return Err(Error::DimensionMismatch(format!(
                "{} entry polynomials for a {u}x{h} output",
                self.entries.len()
            )));
        }
        let (m, n) = self.input_dims;
        for mono in self.entries.iter().flatten() {
            if let Some(&(i, j)) = mono.vars.iter().find(|&&(i, j)| i >= m || j >= n) {
                return Err(Error::DimensionMismatch(format!("variable x[{i}][{j}] outside {m}x{n} input")));
            }
        }
        Ok(())
    }

    fn eval_in<R: Ring>(&self, ring: &R, x: &Matrix<R::Elem>) -> Result<Matrix<R::Elem>> {
        self.check()?;
        if x.dims() != self.input_dims {
            return Err(Error::DimensionMismatch(format!(
                "polynomial takes {}x{} input, got {}x{}",
                self.input_dims.0,
                self.input_dims.1,
                x.rows(),
                x.cols()
            )));
        }
        let data = self
            .entries
            .iter()
            .map(|monos| {
                monos.iter().try_fold(ring.zero(), |acc, mono| {
                    let term = mono
                        .vars
                        .iter()
                        .fold(ring.coefficient(mono.coef)?, |t, &(i, j)| ring.mul(t, x.get(i, j)));
                    Ok::<_, Error>(ring.add(acc, term))
                })
            })
            .collect::<Result<_>>()?;
        Matrix::from_vec(self.output_dims.0, self.output_dims.1, data)
    }

    fn nonzero(&self) -> impl Iterator<Item = &Monomial> {
        self.entries.iter().flatten().filter(|m| m.coef != 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolyFn {
    MatrixPoly { expr: Expr },
    GeneralEntrywise { poly: EntrywisePoly },
}

/// Degree and coefficient bounds: `c` is the largest absolute coefficient
/// and `s_a` the largest per-entry sum of absolute coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyBounds {
    pub degree: usize,
    pub c: f64,
    pub s_a: f64,
}

pub const PRESETS: [&str; 3] = ["identity", "gram", "square"];

impl PolyFn {
    pub fn identity() -> Self {
        PolyFn::MatrixPoly { expr: Expr::Input }
    }

    /// `XᵀX`.
    pub fn gram() -> Self {
        PolyFn::MatrixPoly { expr: Expr::matmul(Expr::transpose(Expr::Input), Expr::Input) }
    }

    /// `XX`, for square inputs.
    pub fn square() -> Self {
        PolyFn::MatrixPoly { expr: Expr::matmul(Expr::Input, Expr::Input) }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(Self::identity()),
            "gram" => Ok(Self::gram()),
            "square" => Ok(Self::square()),
            _ => Err(Error::Config {
                key: "f".into(),
                reason: format!("unknown preset `{name}` (expected one of {})", PRESETS.join(", ")),
            }),
        }
    }

    pub fn preset_name(&self) -> Option<&'static str> {
        PRESETS.into_iter().find(|p| Self::preset(p).is_ok_and(|f| f == *self))
    }

    pub fn is_gram(&self) -> bool {
        *self == Self::gram()
    }

    /// Total degree, computed symbolically.
    pub fn degree(&self) -> usize {
        match self {
            PolyFn::MatrixPoly { expr } => expr.degree_range().1,
            PolyFn::GeneralEntrywise { poly } => poly.nonzero().map(|m| m.vars.len()).max().unwrap_or(0),
        }
    }

    /// True when every term has the same degree.
    pub fn is_homogeneous(&self) -> bool {
        match self {
            PolyFn::MatrixPoly { expr } => {
                let (lo, hi) = expr.degree_range();
                lo == hi
            }
            PolyFn::GeneralEntrywise { poly } => {
                let d = self.degree();
                poly.nonzero().all(|m| m.vars.len() == d)
            }
        }
    }

    pub fn output_dims(&self, m: usize, n: usize) -> Result<(usize, usize)> {
        match self {
            PolyFn::MatrixPoly { expr } => expr.dims(m, n),
            PolyFn::GeneralEntrywise { poly } => {
                if (m, n) != poly.input_dims {
                    return Err(Error::DimensionMismatch(format!(
                        "polynomial takes {}x{} input, got {m}x{n}",
                        poly.input_dims.0, poly.input_dims.1
                    )));
                }
                Ok(poly.output_dims)
            }
        }
    }

    pub fn eval(&self, x: &CMatrix) -> Result<CMatrix> {
        self.eval_in(&ComplexRing, x)
    }

    /// Evaluates over any [`Ring`]; the field baseline uses this with
    /// modular and wrapping integer rings.
    pub fn eval_in<R: Ring>(&self, ring: &R, x: &Matrix<R::Elem>) -> Result<Matrix<R::Elem>> {
        self.output_dims(x.rows(), x.cols())?;
        match self {
            PolyFn::MatrixPoly { expr } => expr.eval_in(ring, x),
            PolyFn::GeneralEntrywise { poly } => poly.eval_in(ring, x),
        }
    }

    /// Expanded monomial form for an `m × n` input. Fails with
    /// [`Error::ExpansionTooLarge`] past `budget` monomials.
    pub fn expand(&self, m: usize, n: usize, budget: usize) -> Result<EntrywisePoly> {
        match self {
            PolyFn::GeneralEntrywise { poly } => {
                self.output_dims(m, n)?;
                Ok(poly.clone())
            }
            PolyFn::MatrixPoly { expr } => {
                expr.dims(m, n)?;
                let pm = expr.expand(m, n, budget)?;
                Ok(EntrywisePoly {
                    input_dims: (m, n),
                    output_dims: (pm.rows, pm.cols),
                    entries: pm
                        .entries
                        .into_iter()
                        .map(|p| p.into_iter().map(|(vars, coef)| Monomial { coef, vars }).collect())
                        .collect(),
                })
            }
        }
    }

    /// `(D, c, s_a)` for an `m × n` input. Presets use closed forms; other
    /// trees are expanded within [`EXPANSION_BUDGET`].
    pub fn degree_and_bounds(&self, m: usize, n: usize) -> Result<PolyBounds> {
        self.output_dims(m, n)?;
        let degree = self.degree();
        match self.preset_name() {
            Some("identity") => return Ok(PolyBounds { degree, c: 1.0, s_a: 1.0 }),
            // Each entry of XᵀX sums m distinct unit monomials; each entry of
            // XX sums n of them.
            Some("gram") => return Ok(PolyBounds { degree, c: 1.0, s_a: m as f64 }),
            Some("square") => return Ok(PolyBounds { degree, c: 1.0, s_a: n as f64 }),
            _ => {}
        }
        let poly = self.expand(m, n, EXPANSION_BUDGET)?;
        let c = poly.nonzero().map(|t| t.coef.abs()).fold(0.0, f64::max);
        let s_a = poly
            .entries
            .iter()
            .map(|e| e.iter().map(|t| t.coef.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(PolyBounds { degree, c, s_a })
    }
}
