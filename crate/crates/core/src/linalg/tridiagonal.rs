//! Implicit-shift QL iteration for real symmetric tridiagonal matrices.

use crate::error::{Error, Result};

use super::{Matrix, SymmetricEigen};

/// Column-major square block: column `i` is `data[i*n..(i+1)*n]`.
pub(crate) struct Columns {
    pub(crate) n: usize,
    pub(crate) data: Vec<f64>,
}

impl Columns {
    pub(crate) fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub(crate) fn col(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn pair_mut(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let n = self.n;
        let (lo, hi) = self.data[i * n..(i + 2) * n].split_at_mut(n);
        (lo, hi)
    }
}

/// Diagonalize the tridiagonal matrix `(d, e)` in place.
///
/// `e[i]` couples rows `i` and `i + 1`; `e` must have length `d.len()` with
/// the last entry ignored. On return `d` holds eigenvalues (unsorted) and
/// `z`, when given, has its columns rotated by the accumulated QL
/// transformations.
pub(crate) fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Columns>) -> Result<()> {
    let n = d.len();
    debug_assert_eq!(e.len(), n);
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let max_total = 30 * n.max(1);
    let mut total = 0usize;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                total += 1;
                if iter > 30 || total > max_total {
                    return Err(Error::NoConvergence { iterations: total });
                }

                // Wilkinson-type shift from the leading 2x2 block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        let (zi, zi1) = z.pair_mut(i);
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hk = *b;
                            *b = s * *a + c * hk;
                            *a = c * *a - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Indices that sort `values` ascending (stable, NaN-free input assumed).
pub(crate) fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Eigen-decomposition of the real symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `offdiag` (`len = diag.len() - 1`).
pub fn tridiagonal_sym_eig(diag: &[f64], offdiag: &[f64], want_vectors: bool) -> Result<SymmetricEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(SymmetricEigen {
            eigenvalues: Vec::new(),
            eigenvectors: want_vectors.then(|| Matrix::zeros(0, 0)),
        });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            actual: offdiag.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = want_vectors.then(|| Columns::identity(n));
    ql_implicit(&mut d, &mut e, z.as_mut())?;

    let order = ascending_order(&d);
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let eigenvectors = z.map(|z| Matrix::from_fn(n, n, |i, k| z.col(order[k])[i]));
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}
