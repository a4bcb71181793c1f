//! Dense complex linear algebra.
//!
//! Everything here works on [`ComplexMatrix`], a column-major dense matrix of
//! `Complex<f64>`. Column-major storage means [`vectorize`] is a plain copy of
//! the storage buffer, which is the ordering every superoperator in
//! [`crate::markovian`] assumes.

mod eigen;
mod expm;
mod json;
mod limits;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub use eigen::{eig_general, eig_hermitian, EigenPair, HermitianEigen};
pub use expm::expm;
pub use json::MatrixJson;
pub use limits::{limits, set_limits, Limits};

pub type C64 = Complex<f64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    /// Builds a matrix from row slices, checking that all entries are finite.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(Error::Shape("matrix must have at least one row and column".into()));
        }
        if rows.iter().any(|row| row.len() != m) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::try_from_nalgebra(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    /// Builds a matrix from a column-stacked buffer.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("invalid dimensions {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::try_from_nalgebra(DMatrix::from_vec(rows, cols, data))
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn try_from_nalgebra(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::Shape("matrix must have at least one row and column".into()));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("matrix contains non-finite entries".into()));
        }
        Ok(Self { inner })
    }

    /// Wraps an nalgebra matrix without validation. Used for internal results.
    pub(crate) fn from_nalgebra(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::Shape(format!(
                "{what} requires a square matrix, got {}x{}",
                self.rows(),
                self.cols()
            )))
        }
    }

    /// Column-major view of the entries.
    pub fn as_slice(&self) -> &[C64] {
        self.inner.as_slice()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_nalgebra(self.inner.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::from_nalgebra(self.inner.transpose())
    }

    pub fn conj(&self) -> Self {
        Self::from_nalgebra(self.inner.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_nalgebra(&self.inner * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(r(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        self.inner
            .column_iter()
            .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows(), other.rows());
        assert_eq!(self.cols(), other.cols());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|`, or infinity for non-square input.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        &self.inner * v
    }

    /// `<u|A|v>`.
    pub fn expectation(&self, u: &ComplexVector, v: &ComplexVector) -> C64 {
        u.dotc(&(&self.inner * v))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.inner[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(&self.inner * &rhs.inner)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(&self.inner + &rhs.inner)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(&self.inner - &rhs.inner)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(-&self.inner)
    }
}

impl std::ops::AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.inner += &rhs.inner;
    }
}

impl std::ops::SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.inner -= &rhs.inner;
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = checked_dim(a.rows(), b.rows())?;
    let cols = checked_dim(a.cols(), b.cols())?;
    let (br, bc) = (b.rows(), b.cols());
    let mut out = DMatrix::zeros(rows, cols);
    for ja in 0..a.cols() {
        for ia in 0..a.rows() {
            let s = a[(ia, ja)];
            if s == ZERO {
                continue;
            }
            for jb in 0..bc {
                for ib in 0..br {
                    out[(ia * br + ib, ja * bc + jb)] = s * b[(ib, jb)];
                }
            }
        }
    }
    Ok(ComplexMatrix::from_nalgebra(out))
}

/// Kronecker product of a non-empty sequence, left to right.
pub fn kron_all<'a>(mats: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut iter = mats.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Shape("kron of an empty list".into()))?
        .clone();
    iter.try_fold(first, |acc, m| kron(&acc, m))
}

fn checked_dim(a: usize, b: usize) -> Result<usize> {
    let cap = limits().max_dim;
    match a.checked_mul(b) {
        Some(d) if d <= cap => Ok(d),
        Some(d) => Err(Error::DimensionLimit { requested: d, cap }),
        None => Err(Error::DimensionLimit {
            requested: usize::MAX,
            cap,
        }),
    }
}

/// Column-stacks a square matrix: `(ρ11, ρ21, …, ρN1, ρ12, …, ρNN)`.
pub fn vectorize(rho: &ComplexMatrix) -> Result<ComplexVector> {
    rho.require_square("vectorize")?;
    Ok(ComplexVector::from_column_slice(rho.as_slice()))
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &ComplexVector, dim: usize) -> Result<ComplexMatrix> {
    if dim == 0 || v.len() != dim * dim {
        return Err(Error::Shape(format!(
            "vector of length {} cannot be reshaped to {dim}x{dim}",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_nalgebra(DMatrix::from_column_slice(
        dim,
        dim,
        v.as_slice(),
    )))
}

/// Integer square root of a vector length, if it is a perfect square.
pub fn square_side(len: usize) -> Option<usize> {
    let d = (len as f64).sqrt().round() as usize;
    (d * d == len).then_some(d)
}
