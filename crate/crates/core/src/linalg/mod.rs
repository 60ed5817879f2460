//! Dense eigensolvers and the small amount of matrix arithmetic the rest of
//! the crate needs.
//!
//! All solvers are sequential and deterministic. Eigenvalues of Hermitian
//! and symmetric inputs come back in ascending order; eigenvectors are the
//! columns of the returned matrix.

mod hermitian;
mod tridiagonal;
mod unitary;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use hermitian::{hermitian_eig, symmetric_eig};
pub use tridiagonal::tridiagonal_sym_eig;
pub use unitary::unitary_eig;

/// Field element a dense matrix can hold: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn scale(self, k: f64) -> Self;
    fn is_finite(self) -> bool;

    fn abs(self) -> f64 {
        self.abs_sqr().sqrt()
    }

    /// `self / |self|`, or one at zero.
    fn unit_phase(self) -> Self {
        let a = self.abs();
        if a == 0.0 {
            Self::from_real(1.0)
        } else {
            self.scale(1.0 / a)
        }
    }

    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ComplexMatrix = Matrix<Complex64>;
pub type RealMatrix = Matrix<f64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::from_real(1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from a list of rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Square matrix with `diag` on the diagonal.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> T {
        let mut t = T::default();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.abs_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        self.map(Scalar::to_complex)
    }

    /// Largest `|m_ij - conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).abs());
            }
        }
        dev
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == T::default() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * other^dagger`, computed from rows of both operands.
    pub fn mul_adjoint(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.cols,
            });
        }
        Ok(Self::from_fn(self.rows, other.rows, |i, j| {
            let mut acc = T::default();
            for (&a, &b) in self.row(i).iter().zip(other.row(j)) {
                acc += a * b.conj();
            }
            acc
        }))
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = T::default();
                for (&a, &b) in self.row(i).iter().zip(v) {
                    acc += a * b;
                }
                acc
            })
            .collect())
    }

    /// `max_ij |(self self^dagger - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.rows {
                let mut acc = T::default();
                for (&a, &b) in self.row(i).iter().zip(self.row(j)) {
                    acc += a * b.conj();
                }
                if i == j {
                    acc -= T::from_real(1.0);
                }
                dev = dev.max(acc.abs());
            }
        }
        dev
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues plus (optionally) eigenvectors stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<E, V> {
    pub eigenvalues: Vec<E>,
    pub eigenvectors: Option<Matrix<V>>,
}

pub type HermitianEigen = EigenDecomposition<f64, Complex64>;
pub type SymmetricEigen = EigenDecomposition<f64, f64>;
pub type UnitaryEigen = EigenDecomposition<Complex64, Complex64>;

impl<E: Copy + Into<Complex64>, V: Scalar> EigenDecomposition<E, V> {
    /// Eigenvector `k` as an owned vector.
    pub fn vector(&self, k: usize) -> Option<Vec<V>> {
        self.eigenvectors.as_ref().map(|v| v.column(k))
    }

    /// Largest `||M v_k - lambda_k v_k||_2` over all eigenpairs.
    pub fn max_residual<M: Scalar>(&self, m: &Matrix<M>) -> Option<f64> {
        let vecs = self.eigenvectors.as_ref()?;
        let mc = m.to_complex();
        let vc = vecs.to_complex();
        let mv = mc.matmul(&vc).ok()?;
        let mut worst = 0.0f64;
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let lam: Complex64 = lam.into();
            let r: f64 = (0..vc.rows()).map(|i| (mv[(i, k)] - lam * vc[(i, k)]).norm_sqr()).sum();
            worst = worst.max(r.sqrt());
        }
        Some(worst)
    }

    /// Largest `|(V^dagger V - I)_ij|`.
    pub fn orthonormality_defect(&self) -> Option<f64> {
        let vecs = self.eigenvectors.as_ref()?;
        Some(vecs.transpose().map(Scalar::conj).unitarity_defect())
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> Option<ComplexMatrix> {
        let v = self.eigenvectors.as_ref()?.to_complex();
        let scaled = ComplexMatrix::from_fn(v.rows(), v.cols(), |i, k| v[(i, k)] * self.eigenvalues[k].into());
        scaled.mul_adjoint(&v).ok()
    }
}

pub(crate) fn require_square<T: Scalar>(m: &Matrix<T>) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.rows())
}
