//! Householder tridiagonalization followed by implicit QL.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::tridiagonal::{ascending_order, ql_implicit, Columns};
use super::{require_square, EigenDecomposition, HermitianEigen, Matrix, Scalar, SymmetricEigen};

const HERMITIAN_TOL: f64 = 1e-12;

/// `H = I - tau v v^dagger` acting on indices `start..n`.
struct Reflector<T> {
    start: usize,
    v: Vec<T>,
    tau: f64,
}

impl<T: Scalar> Reflector<T> {
    fn apply(&self, x: &mut [T]) {
        let tail = &mut x[self.start..];
        let mut dot = T::default();
        for (&vi, &xi) in self.v.iter().zip(tail.iter()) {
            dot += vi.conj() * xi;
        }
        let k = dot.scale(self.tau);
        for (xi, &vi) in tail.iter_mut().zip(&self.v) {
            *xi -= k * vi;
        }
    }
}

struct Tridiagonal<T> {
    diag: Vec<f64>,
    offdiag: Vec<T>,
    reflectors: Vec<Reflector<T>>,
}

/// Reduce the Hermitian matrix `a` (consumed as workspace) to tridiagonal form.
fn tridiagonalize<T: Scalar>(mut a: Matrix<T>) -> Tridiagonal<T> {
    let n = a.rows();
    let mut offdiag = vec![T::default(); n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![T::default(); n];

    for k in 0..n.saturating_sub(2) {
        let s = k + 1;
        let m = n - s;
        let x: Vec<T> = (s..n).map(|i| a[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|xi| xi.abs_sqr()).sum();
        if tail == 0.0 {
            offdiag[k] = x[0];
            continue;
        }
        let x0_abs = x[0].abs();
        let alpha = (x0_abs * x0_abs + tail).sqrt();
        let beta = -x[0].unit_phase().scale(alpha);
        let mut v = x;
        v[0] -= beta;
        let tau = 1.0 / (alpha * (alpha + x0_abs));

        // p = tau * A22 v
        let p = &mut p[..m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a.row(s + i)[s..];
            let mut acc = T::default();
            for (&aij, &vj) in row.iter().zip(&v) {
                acc += aij * vj;
            }
            *pi = acc.scale(tau);
        }
        let mut vp = T::default();
        for (&vi, &pi) in v.iter().zip(p.iter()) {
            vp += vi.conj() * pi;
        }
        let half_k = 0.5 * tau * vp.re();
        for (pi, &vi) in p.iter_mut().zip(&v) {
            *pi -= vi.scale(half_k);
        }
        // A22 -= v w^dagger + w v^dagger
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a.row_mut(s + i)[s..];
            for ((aij, &vj), &wj) in row.iter_mut().zip(&v).zip(p.iter()) {
                *aij -= vi * wj.conj() + wi * vj.conj();
            }
        }
        offdiag[k] = beta;
        reflectors.push(Reflector { start: s, v, tau });
    }
    if n >= 2 {
        offdiag[n - 2] = a[(n - 1, n - 2)];
    }
    let diag = (0..n).map(|i| a[(i, i)].re()).collect();
    Tridiagonal {
        diag,
        offdiag,
        reflectors,
    }
}

fn solve<T: Scalar>(m: &Matrix<T>, want_vectors: bool) -> Result<EigenDecomposition<f64, T>> {
    let n = require_square(m)?;
    let scale = m.max_abs();
    let defect = m.hermiticity_defect();
    if !m.is_finite() || defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitianInput { deviation: defect });
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: want_vectors.then(|| Matrix::zeros(0, 0)),
        });
    }

    let tri = tridiagonalize(m.clone());

    // Diagonal unitary making the off-diagonal real and non-negative.
    let mut phases = Vec::with_capacity(n);
    phases.push(T::from_real(1.0));
    let mut e = Vec::with_capacity(n);
    for (k, &b) in tri.offdiag.iter().enumerate() {
        phases.push(phases[k] * b.unit_phase());
        e.push(b.abs());
    }
    e.push(0.0);
    let mut d = tri.diag;
    let mut z = want_vectors.then(|| Columns::identity(n));
    ql_implicit(&mut d, &mut e, z.as_mut())?;

    let order = ascending_order(&d);
    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let eigenvectors = z.map(|z| {
        let mut out = Matrix::zeros(n, n);
        let mut col = vec![T::default(); n];
        for (k, &src) in order.iter().enumerate() {
            for ((c, &zi), &ph) in col.iter_mut().zip(z.col(src)).zip(&phases) {
                *c = ph.scale(zi);
            }
            for r in tri.reflectors.iter().rev() {
                r.apply(&mut col);
            }
            for (i, &c) in col.iter().enumerate() {
                out[(i, k)] = c;
            }
        }
        out
    });
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigen-decomposition of a complex Hermitian matrix.
///
/// Fails with [`Error::NonHermitianInput`] when `m` deviates from its
/// adjoint by more than `1e-12` relative to its largest entry.
pub fn hermitian_eig(m: &Matrix<Complex64>, want_vectors: bool) -> Result<HermitianEigen> {
    solve(m, want_vectors)
}

/// Real-symmetric fast path of [`hermitian_eig`].
pub fn symmetric_eig(m: &Matrix<f64>, want_vectors: bool) -> Result<SymmetricEigen> {
    solve(m, want_vectors)
}
