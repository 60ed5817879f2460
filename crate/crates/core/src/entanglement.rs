//! Bipartite entanglement of pure qubit states.
//!
//! Entropies are in bits. A [`Bipartition`] always refers to the smaller
//! side; callers may name either side.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::error::{out_of_range, Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::states::PureState;

const DENSITY_TOL: f64 = 1e-12;
/// Eigenvalues in `[-NEG_CLAMP, 0)` are treated as zero; lower ones are errors.
const NEG_CLAMP: f64 = 1e-8;

/// Split of `n` qubits into `A` and its complement, stored with `|A| <= n - |A|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    n_qubits: usize,
    subset: Vec<usize>,
}

impl Bipartition {
    /// `subset` may list either side. If it holds more than half the qubits
    /// it is replaced by its (ascending) complement.
    pub fn new(n_qubits: usize, subset: &[usize]) -> Result<Self> {
        let nu = subset.len();
        if nu == 0 || nu >= n_qubits {
            return Err(Error::InvalidBipartition(format!(
                "subsystem must hold between 1 and {} of {n_qubits} qubits, got {nu}",
                n_qubits.saturating_sub(1)
            )));
        }
        let mut seen = vec![false; n_qubits];
        for &q in subset {
            if q >= n_qubits {
                return Err(Error::InvalidQubitIndex { index: q, n_qubits });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::InvalidBipartition(format!("qubit {q} listed twice")));
            }
        }
        let subset = if 2 * nu > n_qubits {
            (0..n_qubits).filter(|&q| !seen[q]).collect()
        } else {
            subset.to_vec()
        };
        Ok(Self { n_qubits, subset })
    }

    /// The `(1, n-1)` cut isolating `qubit`.
    pub fn single(n_qubits: usize, qubit: usize) -> Result<Self> {
        Self::new(n_qubits, &[qubit])
    }

    /// Qubits `0..nu` against the rest.
    pub fn leading(n_qubits: usize, nu: usize) -> Result<Self> {
        Self::new(n_qubits, &(0..nu).collect::<Vec<_>>())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    /// Size of the (smaller) traced-onto side.
    pub fn nu(&self) -> usize {
        self.subset.len()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|q| !self.subset.contains(q)).collect()
    }
}

/// Reduced density matrix of a qubit subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity and unit trace (both to `1e-12`).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        if !matrix.is_square() || d < 1 || !d.is_power_of_two() {
            return Err(Error::InvalidDensityMatrix(format!(
                "expected a square power-of-two dimension, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_defect();
        if herm > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        Ok(Self { matrix })
    }

    /// `I / d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        Self::new(ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(1.0 / d as f64, 0.0)
            } else {
                Complex64::default()
            }
        }))
    }

    /// `|v><v|` for a normalized `v`.
    pub fn pure(state: &PureState) -> Result<Self> {
        let v = state.amplitudes();
        Self::new(ComplexMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of qubits `nu` with `d = 2^nu`.
    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn determinant_2x2(&self) -> Option<f64> {
        (self.dim() == 2).then(|| {
            let m = &self.matrix;
            (m[(0, 0)].re * m[(1, 1)].re) - m[(0, 1)].norm_sqr()
        })
    }

    /// `tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues, ascending, with small negatives clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let raw = if self.dim() == 2 {
            let m = &self.matrix;
            let (a, b) = (m[(0, 0)].re, m[(1, 1)].re);
            let half_gap = (0.25 * (a - b).powi(2) + m[(0, 1)].norm_sqr()).sqrt();
            let mid = 0.5 * (a + b);
            vec![mid - half_gap, mid + half_gap]
        } else {
            hermitian_eig(&self.matrix, false)?.eigenvalues
        };
        raw.into_iter()
            .map(|l| {
                if l >= 0.0 {
                    Ok(l)
                } else if l >= -NEG_CLAMP {
                    Ok(0.0)
                } else {
                    Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {l:.3e}")))
                }
            })
            .collect()
    }
}

/// Bit position (counted from the least significant end) of `qubit`.
fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    n_qubits - 1 - qubit
}

/// Basis-index offsets contributed by every assignment of `qubits`, in the
/// order where `qubits[0]` is the most significant digit.
fn offsets(n_qubits: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|a| {
            qubits.iter().enumerate().fold(0, |acc, (pos, &q)| {
                if (a >> (k - 1 - pos)) & 1 == 1 {
                    acc | (1 << bit_of(n_qubits, q))
                } else {
                    acc
                }
            })
        })
        .collect()
}

fn check_partition(state: &PureState, part: &Bipartition) -> Result<()> {
    let n = state.require_qubits()?;
    if n != part.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: part.n_qubits(),
            actual: n,
        });
    }
    Ok(())
}

/// `rho_A = tr_B |psi><psi|` for the partition's (smaller) side `A`.
///
/// Rows and columns of `rho_A` are labelled by the `A` qubits in the order
/// stored in the partition, first qubit most significant.
pub fn partial_trace(state: &PureState, part: &Bipartition) -> Result<DensityMatrix> {
    check_partition(state, part)?;
    let n = part.n_qubits();
    let off_a = offsets(n, part.subset());
    let off_b = offsets(n, &part.complement());
    let psi = state.amplitudes();
    // Psi[a][b] = psi(idx(a, b)); rho = Psi Psi^dagger.
    let block = ComplexMatrix::from_fn(off_a.len(), off_b.len(), |a, b| psi[off_a[a] | off_b[b]]);
    let mut rho = block.mul_adjoint(&block)?;
    let d = rho.rows();
    for i in 0..d {
        rho[(i, i)] = Complex64::new(rho[(i, i)].re, 0.0);
        for j in i + 1..d {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
    DensityMatrix::new(rho)
}

/// `-tr(rho log2 rho)` with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum())
}

/// Single-qubit reduced state entries `(rho_00, rho_11, rho_01)`.
fn single_qubit_block(state: &PureState, qubit: usize) -> Result<(f64, f64, Complex64)> {
    let n = state.require_qubits()?;
    if n < 2 {
        return Err(Error::InvalidBipartition(format!(
            "a single-qubit cut needs at least 2 qubits, got {n}"
        )));
    }
    if qubit >= n {
        return Err(Error::InvalidQubitIndex {
            index: qubit,
            n_qubits: n,
        });
    }
    let bit = 1usize << bit_of(n, qubit);
    let psi = state.amplitudes();
    let (mut a, mut b, mut c) = (0.0, 0.0, Complex64::default());
    for i in (0..psi.len()).filter(|i| i & bit == 0) {
        let (x, y) = (psi[i], psi[i | bit]);
        a += x.norm_sqr();
        b += y.norm_sqr();
        c += x * y.conj();
    }
    Ok((a, b, c))
}

/// `tau = 4 det rho_A` for the `(1, n-1)` cut at `qubit`, clamped to `[0, 1]`.
pub fn tangle(state: &PureState, qubit: usize) -> Result<f64> {
    let (a, b, c) = single_qubit_block(state, qubit)?;
    Ok((4.0 * (a * b - c.norm_sqr())).clamp(0.0, 1.0))
}

/// Tangles of every single-qubit cut, in qubit order.
pub fn all_tangles(state: &PureState) -> Result<Vec<f64>> {
    let n = state.require_qubits()?;
    (0..n).map(|q| tangle(state, q)).collect()
}

/// Binary entropy `h(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

fn check_tangle(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(out_of_range("tau", tau, "tangle must lie in [0, 1]"))
    }
}

/// Von Neumann entropy of a `(1, n-1)` cut as a function of its tangle.
pub fn entropy_from_tangle(tau: f64) -> Result<f64> {
    check_tangle(tau)?;
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - tau).sqrt())))
}

/// Truncation `S_m(tau) = 1 - (1/ln 2) sum_{k=1}^m (1-tau)^k / (2k(2k-1))`.
pub fn tangle_expansion(tau: f64, order: usize) -> Result<f64> {
    check_tangle(tau)?;
    if order < 1 {
        return Err(out_of_range("m", order as f64, "expansion order must be at least 1"));
    }
    let x = 1.0 - tau;
    let mut xk = 1.0;
    let mut sum = 0.0;
    for k in 1..=order {
        xk *= x;
        let k = k as f64;
        sum += xk / (2.0 * k * (2.0 * k - 1.0));
    }
    Ok(1.0 - sum / LN_2)
}

/// `S_L = d/(d-1) (1 - tr rho^2)`, in `[0, 1]`.
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim();
    if d < 2 {
        return Err(Error::InvalidDensityMatrix("linear entropy needs d >= 2".into()));
    }
    let d = d as f64;
    Ok(d / (d - 1.0) * (1.0 - rho.purity()))
}

/// Expansion of the von Neumann entropy around `I/2^nu` to order `m`:
/// `nu + (1/ln 2) sum_k (-2^nu)^k / (k(k+1)) tr((rho - I/2^nu)^{k+1})`.
///
/// Diagnostic only; the series converges when every `|2^nu lambda - 1| < 1`.
pub fn entropy_expansion_general(rho: &DensityMatrix, order: usize) -> Result<f64> {
    if order < 1 {
        return Err(out_of_range("m", order as f64, "expansion order must be at least 1"));
    }
    let d = rho.dim() as f64;
    let shifted: Vec<f64> = rho.eigenvalues()?.into_iter().map(|l| l - 1.0 / d).collect();
    let mut powers = shifted.clone();
    let mut sum = 0.0;
    let mut coef = 1.0;
    for k in 1..=order {
        coef *= -d;
        for (p, s) in powers.iter_mut().zip(&shifted) {
            *p *= s;
        }
        let tr: f64 = powers.iter().sum();
        let k = k as f64;
        sum += coef / (k * (k + 1.0)) * tr;
    }
    Ok(rho.qubits() as f64 + sum / LN_2)
}

/// Meyer-Wallach `Q`: mean tangle over all single-qubit cuts.
pub fn meyer_wallach(state: &PureState) -> Result<f64> {
    let t = all_tangles(state)?;
    Ok(t.iter().sum::<f64>() / t.len() as f64)
}

/// Entropy of entanglement of `state` across `part`.
pub fn bipartite_entropy(state: &PureState, part: &Bipartition) -> Result<f64> {
    if part.nu() == 1 {
        return entropy_from_tangle(tangle(state, part.subset()[0])?);
    }
    von_neumann_entropy(&partial_trace(state, part)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::states::cue_state;
    use rand::Rng;

    fn state(amps: &[f64]) -> PureState {
        PureState::from_real(amps).unwrap()
    }

    fn three_term() -> PureState {
        state(&[1.0, 1.0, 1.0, 0.0])
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn bipartition_canonicalizes_to_smaller_side() {
        let p = Bipartition::new(5, &[4, 0, 2]).unwrap();
        assert_eq!(p.subset(), &[1, 3]);
        assert_eq!(p.nu(), 2);
        let q = Bipartition::new(4, &[3, 1]).unwrap();
        assert_eq!(q.subset(), &[3, 1]);
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(matches!(
            Bipartition::new(3, &[5]),
            Err(Error::InvalidQubitIndex { .. })
        ));
        assert!(Bipartition::new(3, &[1, 1]).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let p0 = Bipartition::single(2, 0).unwrap();
        let rho = partial_trace(&state(&[0.0, 1.0, 0.0, 0.0]), &p0).unwrap();
        close(rho.matrix()[(0, 0)].re, 1.0, 1e-15);
        close(rho.matrix()[(1, 1)].re, 0.0, 1e-15);

        let rho = partial_trace(&PureState::ghz(2).unwrap(), &p0).unwrap();
        close(rho.matrix()[(0, 0)].re, 0.5, 1e-15);
        close(rho.matrix()[(0, 1)].norm(), 0.0, 1e-15);

        // brute force: rho_A[a][a'] = sum_b psi[2a+b] conj(psi[2a'+b])
        let s = three_term();
        let psi = s.amplitudes();
        let rho = partial_trace(&s, &p0).unwrap();
        for a in 0..2 {
            for ap in 0..2 {
                let mut want = Complex64::default();
                for b in 0..2 {
                    want += psi[2 * a + b] * psi[2 * ap + b].conj();
                }
                assert!((rho.matrix()[(a, ap)] - want).norm() < 1e-15);
            }
        }
        close(rho.matrix()[(0, 0)].re, 2.0 / 3.0, 1e-15);
        close(rho.matrix()[(0, 1)].re, 1.0 / 3.0, 1e-15);
        close(rho.matrix()[(1, 1)].re, 1.0 / 3.0, 1e-15);
    }

    #[test]
    fn partial_trace_respects_subset_order() {
        // |q0 q1 q2 q3> = |0 1 1 1>
        let s = PureState::basis(16, 0b0111).unwrap();
        let rho = partial_trace(&s, &Bipartition::new(4, &[3, 0]).unwrap()).unwrap();
        // A = (q3, q0) = (1, 0) -> index 0b10
        close(rho.matrix()[(2, 2)].re, 1.0, 1e-15);
    }

    #[test]
    fn partial_trace_requires_qubits() {
        let s = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let p = Bipartition::single(2, 0).unwrap();
        assert!(matches!(partial_trace(&s, &p), Err(Error::NotPowerOfTwo(3))));
        let s8 = PureState::basis(8, 0).unwrap();
        assert!(matches!(partial_trace(&s8, &p), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn von_neumann_examples() {
        let pure = DensityMatrix::pure(&three_term()).unwrap();
        close(von_neumann_entropy(&pure).unwrap(), 0.0, 1e-12);
        close(
            von_neumann_entropy(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap(),
            1.0,
            1e-15,
        );
        let diag = DensityMatrix::new(ComplexMatrix::from_diagonal(&[
            Complex64::new(0.75, 0.0),
            Complex64::new(0.25, 0.0),
        ]))
        .unwrap();
        let h34 = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        close(von_neumann_entropy(&diag).unwrap(), h34, 1e-15);
        close(h34, 0.811278, 1e-6);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = ComplexMatrix::from_diagonal(&[Complex64::new(0.5, 0.0), Complex64::new(0.4, 0.0)]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = ComplexMatrix::from_diagonal(&[Complex64::new(1.1, 0.0), Complex64::new(-0.1, 0.0)]);
        let rho = DensityMatrix::new(negative).unwrap();
        assert!(von_neumann_entropy(&rho).is_err());
        let tiny = ComplexMatrix::from_diagonal(&[Complex64::new(1.0 + 1e-11, 0.0), Complex64::new(-1e-11, 0.0)]);
        assert!(von_neumann_entropy(&DensityMatrix::new(tiny).unwrap()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn tangle_examples() {
        close(tangle(&PureState::ghz(2).unwrap(), 0).unwrap(), 1.0, 1e-15);
        close(tangle(&state(&[0.0, 1.0, 0.0, 0.0]), 0).unwrap(), 0.0, 1e-15);
        close(tangle(&three_term(), 0).unwrap(), 4.0 / 9.0, 1e-15);
        assert!(tangle(&PureState::basis(2, 0).unwrap(), 0).is_err());
        assert!(matches!(tangle(&three_term(), 2), Err(Error::InvalidQubitIndex { .. })));
    }

    #[test]
    fn entropy_and_expansion_values() {
        close(entropy_from_tangle(0.0).unwrap(), 0.0, 1e-15);
        close(entropy_from_tangle(1.0).unwrap(), 1.0, 1e-15);
        close(entropy_from_tangle(0.75).unwrap(), 0.811278, 1e-6);
        close(tangle_expansion(0.0, 1).unwrap(), 1.0 - 1.0 / (2.0 * LN_2), 1e-15);
        close(tangle_expansion(0.0, 1).unwrap(), 0.278652, 1e-6);
        close(
            tangle_expansion(0.0, 2).unwrap(),
            1.0 - (0.5 + 1.0 / 12.0) / LN_2,
            1e-15,
        );
        close(tangle_expansion(0.0, 2).unwrap(), 0.158434, 1e-5);
        for m in 1..8 {
            assert_eq!(tangle_expansion(1.0, m).unwrap(), 1.0);
        }
        assert!(entropy_from_tangle(1.5).is_err());
        assert!(tangle_expansion(-0.1, 1).is_err());
        assert!(tangle_expansion(0.5, 0).is_err());
    }

    #[test]
    fn expansion_improves_monotonically() {
        for i in 0..=1000 {
            let tau = i as f64 / 1000.0;
            let exact = entropy_from_tangle(tau).unwrap();
            let mut prev = f64::INFINITY;
            for m in 1..=6 {
                let err = (exact - tangle_expansion(tau, m).unwrap()).abs();
                assert!(err <= prev, "tau={tau} m={m}");
                prev = err;
            }
        }
    }

    #[test]
    fn linear_entropy_examples() {
        let pure = DensityMatrix::pure(&three_term()).unwrap();
        close(linear_entropy(&pure).unwrap(), 0.0, 1e-15);
        for d in [2, 4, 8] {
            close(
                linear_entropy(&DensityMatrix::maximally_mixed(d).unwrap()).unwrap(),
                1.0,
                1e-15,
            );
        }
        let rho = partial_trace(&three_term(), &Bipartition::single(2, 0).unwrap()).unwrap();
        close(linear_entropy(&rho).unwrap(), 4.0 / 9.0, 1e-15);
        close(
            linear_entropy(&rho).unwrap(),
            4.0 * rho.determinant_2x2().unwrap(),
            1e-12,
        );
    }

    #[test]
    fn general_expansion() {
        for nu in 1..4 {
            let rho = DensityMatrix::maximally_mixed(1 << nu).unwrap();
            for m in 1..5 {
                close(entropy_expansion_general(&rho, m).unwrap(), nu as f64, 1e-14);
            }
        }
        // nu = 1, order 1 equals S_1(tau)
        let mut rng = stream_rng(4, 0, 0);
        for _ in 0..20 {
            let s = cue_state(16, &mut rng).unwrap();
            let rho = partial_trace(&s, &Bipartition::single(4, 1).unwrap()).unwrap();
            let tau = tangle(&s, 1).unwrap();
            close(
                entropy_expansion_general(&rho, 1).unwrap(),
                tangle_expansion(tau, 1).unwrap(),
                1e-12,
            );
        }
    }

    #[test]
    fn general_expansion_converges_near_maximally_mixed() {
        let mut rng = stream_rng(8, 0, 0);
        for d in [2usize, 4, 8] {
            for _ in 0..10 {
                // eigenvalues within 10% of 1/d, random eigenbasis
                let mut w: Vec<f64> = (0..d).map(|_| 1.0 + 0.1 * (2.0 * rng.random::<f64>() - 1.0)).collect();
                let tot: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= tot);
                let v = cue_state(d * d, &mut rng).unwrap();
                let q = gram_schmidt(d, v.amplitudes());
                let rho = ComplexMatrix::from_fn(d, d, |i, j| {
                    (0..d).map(|k| q[k][i] * w[k] * q[k][j].conj()).sum::<Complex64>()
                });
                let rho = ComplexMatrix::from_fn(d, d, |i, j| 0.5 * (rho[(i, j)] + rho[(j, i)].conj()));
                let rho = DensityMatrix::new(rho).unwrap();
                let exact = von_neumann_entropy(&rho).unwrap();
                // tail bound with eps = max |d w_k - 1|
                let eps = w.iter().fold(0.0f64, |e, x| e.max((d as f64 * x - 1.0).abs()));
                for m in 1..=4 {
                    let err = (entropy_expansion_general(&rho, m).unwrap() - exact).abs();
                    let k = m as f64;
                    let bound = eps.powi(m as i32 + 2) / ((k + 1.0) * (k + 2.0) * LN_2 * (1.0 - eps));
                    assert!(err <= bound + 1e-13, "d={d} m={m}: {err} > {bound}");
                }
            }
        }
    }

    fn gram_schmidt(d: usize, seed: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut out: Vec<Vec<Complex64>> = Vec::new();
        for k in 0..d {
            let mut v: Vec<Complex64> = seed[k * d..(k + 1) * d].to_vec();
            for u in &out {
                let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
            }
            let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            out.push(v.into_iter().map(|x| x / n).collect());
        }
        out
    }

    #[test]
    fn meyer_wallach_examples() {
        for n in 2..6 {
            close(meyer_wallach(&PureState::ghz(n).unwrap()).unwrap(), 1.0, 1e-14);
        }
        let product = PureState::from_real(&[1.0, 2.0])
            .unwrap()
            .tensor(&PureState::from_real(&[3.0, -1.0]).unwrap())
            .unwrap()
            .tensor(&PureState::from_real(&[0.5, 0.5]).unwrap())
            .unwrap();
        close(meyer_wallach(&product).unwrap(), 0.0, 1e-14);
        close(meyer_wallach(&PureState::w(3).unwrap()).unwrap(), 8.0 / 9.0, 1e-14);
    }

    #[test]
    fn bipartite_entropy_examples() {
        let bell = PureState::ghz(2).unwrap();
        close(
            bipartite_entropy(&bell, &Bipartition::single(2, 0).unwrap()).unwrap(),
            1.0,
            1e-14,
        );
        // qubits (0,1) and (2,3) form Bell pairs
        let pairs = bell.tensor(&bell).unwrap();
        close(
            bipartite_entropy(&pairs, &Bipartition::new(4, &[0, 1]).unwrap()).unwrap(),
            0.0,
            1e-12,
        );
        close(
            bipartite_entropy(&pairs, &Bipartition::new(4, &[0, 2]).unwrap()).unwrap(),
            2.0,
            1e-12,
        );
    }

    #[test]
    fn purity_symmetry_on_random_eight_qubit_state() {
        let mut rng = stream_rng(12, 0, 0);
        let s = cue_state(256, &mut rng).unwrap();
        for _ in 0..20 {
            let nu = rng.random_range(1..8);
            let mut qubits: Vec<usize> = (0..8).collect();
            rand::seq::SliceRandom::shuffle(qubits.as_mut_slice(), &mut rng);
            let a = &qubits[..nu];
            let b = &qubits[nu..];
            let sa = von_neumann_entropy(&partial_trace_raw(&s, a)).unwrap();
            let sb = von_neumann_entropy(&partial_trace_raw(&s, b)).unwrap();
            close(sa, sb, 1e-10);
        }
    }

    /// Trace onto exactly `keep`, bypassing canonicalization.
    fn partial_trace_raw(s: &PureState, keep: &[usize]) -> DensityMatrix {
        let n = s.n_qubits().unwrap();
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let oa = offsets(n, keep);
        let ob = offsets(n, &rest);
        let psi = s.amplitudes();
        let m = ComplexMatrix::from_fn(oa.len(), oa.len(), |i, j| {
            ob.iter().map(|&b| psi[oa[i] | b] * psi[oa[j] | b].conj()).sum()
        });
        let m = ComplexMatrix::from_fn(oa.len(), oa.len(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
        DensityMatrix::new(m).unwrap()
    }
}
