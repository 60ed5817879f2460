//! Unitary eigenproblem through the Cayley transform.
//!
//! For a unitary `U'` without eigenvalue `-1`, `H = i (I - U')(I + U')^-1`
//! is Hermitian and shares its eigenvectors. A global phase rotation
//! `U' = e^{i alpha} U` moves the spectrum away from `-1`; if the rotated
//! spectrum still comes too close the next phase in a fixed sequence is
//! tried.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{hermitian_eig, require_square, ComplexMatrix, Scalar, UnitaryEigen};

const UNITARY_TOL: f64 = 1e-10;
/// Smallest admissible `min_k |1 + lambda'_k|`.
const MIN_SEPARATION: f64 = 1e-6;
const MAX_ATTEMPTS: usize = 12;
/// Fractional part of the golden ratio; successive phases fill the circle evenly.
const PHASE_STEP: f64 = 0.618_033_988_749_894_9;

/// In-place LU factorization with partial pivoting. Returns the row
/// permutation, or `None` if a pivot vanishes.
fn lu_factor(a: &mut ComplexMatrix) -> Option<Vec<usize>> {
    let n = a.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, best) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return None;
        }
        if piv != k {
            perm.swap(piv, k);
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
        }
        let inv = a[(k, k)].inv();
        let pivot_row: Vec<Complex64> = a.row(k)[k + 1..].to_vec();
        for i in k + 1..n {
            let l = a[(i, k)] * inv;
            a[(i, k)] = l;
            if l == Complex64::default() {
                continue;
            }
            let row = &mut a.row_mut(i)[k + 1..];
            for (x, &p) in row.iter_mut().zip(&pivot_row) {
                *x -= l * p;
            }
        }
    }
    Some(perm)
}

/// Solve `A X = B` given the packed LU factors of `A`.
fn lu_solve(lu: &ComplexMatrix, perm: &[usize], b: &ComplexMatrix) -> ComplexMatrix {
    let n = lu.rows();
    let mut x = ComplexMatrix::from_fn(n, b.cols(), |i, j| b[(perm[i], j)]);
    for i in 0..n {
        for k in 0..i {
            let l = lu[(i, k)];
            if l == Complex64::default() {
                continue;
            }
            let (head, tail) = split_rows(&mut x, k, i);
            for (xi, &xk) in tail.iter_mut().zip(head.iter()) {
                *xi -= l * xk;
            }
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let u = lu[(i, k)];
            if u == Complex64::default() {
                continue;
            }
            let (xi, xk) = split_rows(&mut x, i, k);
            for (a, &b) in xi.iter_mut().zip(xk.iter()) {
                *a -= u * b;
            }
        }
        let inv = lu[(i, i)].inv();
        for v in x.row_mut(i) {
            *v *= inv;
        }
    }
    x
}

/// Mutable views of rows `a` and `b` (`a != b`), returned in that order.
fn split_rows(m: &mut ComplexMatrix, a: usize, b: usize) -> (&mut [Complex64], &mut [Complex64]) {
    let cols = m.cols;
    let (lo, hi) = (a.min(b), a.max(b));
    let (head, tail) = m.data.split_at_mut(hi * cols);
    let lo_row = &mut head[lo * cols..(lo + 1) * cols];
    let hi_row = &mut tail[..cols];
    if a < b {
        (lo_row, hi_row)
    } else {
        (hi_row, lo_row)
    }
}

/// Eigen-decomposition of a unitary matrix.
///
/// Eigenvalues are returned sorted by argument in `(-pi, pi]`.
pub fn unitary_eig(u: &ComplexMatrix) -> Result<UnitaryEigen> {
    let n = require_square(u)?;
    let defect = u.unitarity_defect();
    if !u.is_finite() || defect > UNITARY_TOL {
        return Err(Error::NonUnitaryInput { deviation: defect });
    }
    if n == 0 {
        return Ok(UnitaryEigen {
            eigenvalues: Vec::new(),
            eigenvectors: Some(ComplexMatrix::zeros(0, 0)),
        });
    }

    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    for attempt in 0..MAX_ATTEMPTS {
        let alpha = TAU * (0.5 + attempt as f64 * PHASE_STEP).fract();
        let rot = Complex64::from_polar(1.0, alpha);
        let mut plus = ComplexMatrix::from_fn(n, n, |r, c| {
            rot * u[(r, c)] + if r == c { one } else { Complex64::default() }
        });
        let minus = ComplexMatrix::from_fn(n, n, |r, c| {
            -rot * u[(r, c)] + if r == c { one } else { Complex64::default() }
        });
        let Some(perm) = lu_factor(&mut plus) else {
            continue;
        };
        let x = lu_solve(&plus, &perm, &minus);
        let h = ComplexMatrix::from_fn(n, n, |r, c| 0.5 * i * (x[(r, c)] - x[(c, r)].conj()));
        let eig = hermitian_eig(&h, true)?;

        let mu_max = eig.eigenvalues.iter().fold(0.0f64, |m, mu| m.max(mu.abs()));
        if 2.0 / mu_max.hypot(1.0) < MIN_SEPARATION {
            continue;
        }
        let back = rot.conj();
        let lambdas: Vec<Complex64> = eig
            .eigenvalues
            .iter()
            .map(|&mu| back * (one + i * mu) / (one - i * mu))
            .collect();
        let vecs = eig.eigenvectors.expect("requested eigenvectors");

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lambdas[a].arg().total_cmp(&lambdas[b].arg()));
        let eigenvalues = order.iter().map(|&k| lambdas[k].unit_phase()).collect();
        let eigenvectors = ComplexMatrix::from_fn(n, n, |r, k| vecs[(r, order[k])]);
        return Ok(UnitaryEigen {
            eigenvalues,
            eigenvectors: Some(eigenvectors),
        });
    }
    Err(Error::DegenerateSpectrum { attempts: MAX_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let eig = unitary_eig(&ComplexMatrix::identity(5)).unwrap();
        for l in &eig.eigenvalues {
            assert!((l - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_phases() {
        let d = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let u = ComplexMatrix::from_diagonal(&d);
        let eig = unitary_eig(&u).unwrap();
        // sorted by argument: -i, 1, i, -1
        let expected = [d[3], d[0], d[1], d[2]];
        let basis = [3usize, 0, 1, 2];
        let vecs = eig.eigenvectors.as_ref().unwrap();
        for (k, (l, e)) in eig.eigenvalues.iter().zip(expected).enumerate() {
            assert!((l - e).norm() < 1e-12);
            assert!((vecs[(basis[k], k)].norm() - 1.0).abs() < 1e-12);
        }
        assert!(eig.max_residual(&u).unwrap() < 1e-12);
    }

    #[test]
    fn lu_solves_small_system() {
        let a = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(2.0, 1.0)], vec![c(1.0, 0.0), c(1.0, -1.0)]]).unwrap();
        let b = ComplexMatrix::identity(2);
        let mut lu = a.clone();
        let perm = lu_factor(&mut lu).unwrap();
        let x = lu_solve(&lu, &perm, &b);
        let prod = a.matmul(&x).unwrap();
        for r in 0..2 {
            for k in 0..2 {
                let want = if r == k { 1.0 } else { 0.0 };
                assert!((prod[(r, k)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn random_unitary_residuals() {
        // Q from Gram-Schmidt of a complex Gaussian-ish matrix
        let n = 48;
        let mut rng = stream_rng(23, 0, 0);
        let g = ComplexMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for j in 0..n {
            let mut v = g.column(j);
            for _ in 0..2 {
                for u in &cols {
                    let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= dot * ui;
                    }
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
        let u = ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
        let eig = unitary_eig(&u).unwrap();
        assert!(eig.max_residual(&u).unwrap() <= 1e-8 * (n as f64).sqrt());
        assert!(eig.orthonormality_defect().unwrap() <= 1e-8);
        for l in &eig.eigenvalues {
            assert!((l.norm() - 1.0).abs() <= 1e-8);
        }
        let tr = u.trace();
        let sum: Complex64 = eig.eigenvalues.iter().sum();
        assert!((tr - sum).norm() <= 1e-8 * n as f64);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(unitary_eig(&m), Err(Error::NonUnitaryInput { .. })));
    }

    #[test]
    fn eigenvalue_at_minus_one_is_rotated_away() {
        let u = ComplexMatrix::from_diagonal(&[c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        let eig = unitary_eig(&u).unwrap();
        assert!(eig.max_residual(&u).unwrap() < 1e-12);
    }
}
