//! Physical systems whose eigenvectors are compared with the random-vector
//! predictions: a disordered spin register, a random unitary map with
//! intermediate statistics, and the one-dimensional Anderson chain.
//!
//! Each realization of disorder is keyed by `(seed, realization)`, so
//! realizations can be diagonalized in any order.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Serialize, Serializer};

use crate::error::{out_of_range, Error, Result};
use crate::linalg::{symmetric_eig, tridiagonal_sym_eig, unitary_eig, ComplexMatrix, RealMatrix};
use crate::rng::{stream_rng, streams};
use crate::states::PureState;

const MAX_SPIN_QUBITS: usize = 12;
const MAX_ISRM_DIM: usize = 1 << 11;
const MAX_ANDERSON_SITES: usize = 1 << 12;
const UNITARY_TOL: f64 = 1e-10;
/// `N gamma` closer than this to an integer is refused.
const GAMMA_INTEGER_TOL: f64 = 1e-9;
/// Smallest admissible `|1 - e^{i theta}|` in the map's denominator.
const MIN_DENOMINATOR: f64 = 1e-12;

/// Eigenvalues and the matching normalized eigenvectors.
#[derive(Debug, Clone)]
pub struct ModelSpectrum<E> {
    pub eigenvalues: Vec<E>,
    pub states: Vec<PureState>,
}

impl<E> ModelSpectrum<E> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Which eigenvectors of a spectrum to keep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SpectralWindow {
    #[default]
    Full,
    /// The central `fraction` of the spectrum, by eigenvalue rank.
    Central(f64),
}

impl SpectralWindow {
    pub const CENTRAL_HALF: Self = SpectralWindow::Central(0.5);

    fn range(self, n: usize) -> Result<std::ops::Range<usize>> {
        match self {
            SpectralWindow::Full => Ok(0..n),
            SpectralWindow::Central(f) => {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(out_of_range("window", f, "central fraction must be in (0, 1]"));
                }
                let keep = ((n as f64 * f).round() as usize).clamp(1, n);
                let start = (n - keep) / 2;
                Ok(start..start + keep)
            }
        }
    }
}

impl fmt::Display for SpectralWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralWindow::Full => write!(f, "full"),
            SpectralWindow::Central(x) => write!(f, "central{}", (x * 100.0).round()),
        }
    }
}

impl Serialize for SpectralWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for SpectralWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "all" => Ok(SpectralWindow::Full),
            _ => {
                let pct = s
                    .strip_prefix("central")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown window '{s}'")))?;
                let w = SpectralWindow::Central(pct / 100.0);
                w.range(1)?;
                Ok(w)
            }
        }
    }
}

fn real_states(eig: &crate::linalg::SymmetricEigen, range: std::ops::Range<usize>) -> Result<ModelSpectrum<f64>> {
    let vecs = eig.eigenvectors.as_ref().expect("eigenvectors requested");
    let n = vecs.rows();
    let mut states = Vec::with_capacity(range.len());
    for k in range.clone() {
        let col: Vec<Complex64> = (0..n).map(|i| Complex64::new(vecs[(i, k)], 0.0)).collect();
        states.push(PureState::normalized(col)?);
    }
    Ok(ModelSpectrum {
        eigenvalues: eig.eigenvalues[range].to_vec(),
        states,
    })
}

/// Disordered qubit register with random fields and random `XX` couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinModelParams {
    pub n: usize,
    /// Mean level splitting; the energy unit.
    pub delta0: f64,
    /// Width of the field distribution.
    pub delta: f64,
    /// Couplings are uniform in `[-j_coupling, j_coupling]`.
    pub j_coupling: f64,
    pub seed: u64,
}

impl SpinModelParams {
    /// Parameters in the units `delta0 = 1`, with `delta` and `J` given as
    /// ratios `delta/delta0` and `J/delta`.
    pub fn from_ratios(n: usize, delta_ratio: f64, j_over_delta: f64, seed: u64) -> Self {
        Self {
            n,
            delta0: 1.0,
            delta: delta_ratio,
            j_coupling: j_over_delta * delta_ratio,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(out_of_range("n", 0.0, "need at least one qubit"));
        }
        if self.n > MAX_SPIN_QUBITS {
            return Err(Error::TooLarge(format!(
                "spin model with {} qubits (limit {MAX_SPIN_QUBITS})",
                self.n
            )));
        }
        for (name, v) in [
            ("delta0", self.delta0),
            ("delta", self.delta),
            ("j_coupling", self.j_coupling),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(out_of_range(name, v, "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// One disorder realization of `H = sum_i G_i Z_i + sum_{i<j} J_ij X_i X_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinModel {
    n: usize,
    fields: Vec<f64>,
    /// `(i, j, J_ij)` with `i < j`.
    couplings: Vec<(usize, usize, f64)>,
}

impl SpinModel {
    pub fn new(fields: Vec<f64>, couplings: Vec<(usize, usize, f64)>) -> Result<Self> {
        let n = fields.len();
        SpinModelParams {
            n,
            delta0: 0.0,
            delta: 0.0,
            j_coupling: 0.0,
            seed: 0,
        }
        .validate()?;
        for &(i, j, _) in &couplings {
            if i >= j || j >= n {
                return Err(Error::InvalidSpec(format!("coupling ({i}, {j}) needs i < j < {n}")));
            }
        }
        Ok(Self { n, fields, couplings })
    }

    /// Draw realization number `realization`.
    pub fn sample(p: &SpinModelParams, realization: u64) -> Result<Self> {
        p.validate()?;
        let mut rng = stream_rng(p.seed, streams::REALIZATION, realization);
        let lo = p.delta0 - p.delta / 2.0;
        let fields = (0..p.n).map(|_| lo + p.delta * rng.random::<f64>()).collect();
        let mut couplings = Vec::with_capacity(p.n * (p.n - 1) / 2);
        for i in 0..p.n {
            for j in i + 1..p.n {
                couplings.push((i, j, p.j_coupling * (2.0 * rng.random::<f64>() - 1.0)));
            }
        }
        Ok(Self {
            n: p.n,
            fields,
            couplings,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    /// Dense real symmetric Hamiltonian; qubit 0 is the most significant bit.
    pub fn hamiltonian(&self) -> RealMatrix {
        let n = self.n;
        let dim = 1usize << n;
        let bit = |q: usize| 1usize << (n - 1 - q);
        let mut h = RealMatrix::zeros(dim, dim);
        for s in 0..dim {
            h[(s, s)] = self
                .fields
                .iter()
                .enumerate()
                .map(|(q, g)| if s & bit(q) == 0 { *g } else { -*g })
                .sum();
            for &(i, j, c) in &self.couplings {
                let t = s ^ bit(i) ^ bit(j);
                h[(s, t)] += c;
            }
        }
        h
    }

    pub fn spectrum(&self) -> Result<ModelSpectrum<f64>> {
        let eig = symmetric_eig(&self.hamiltonian(), true)?;
        real_states(&eig, 0..1 << self.n)
    }
}

/// All eigenvectors of realization `realization` of the spin model.
pub fn spin_eigvectors(p: &SpinModelParams, realization: u64) -> Result<ModelSpectrum<f64>> {
    SpinModel::sample(p, realization)?.spectrum()
}

/// Parameter of the intermediate-statistics map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `p/q`, evaluated in exact integer arithmetic inside the exponents.
    Rational {
        p: i64,
        q: u64,
    },
    Real(f64),
}

impl Gamma {
    pub fn rational(p: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidSpec("gamma denominator must be non-zero".into()));
        }
        Ok(Gamma::Rational { p, q })
    }

    pub fn value(&self) -> f64 {
        match *self {
            Gamma::Rational { p, q } => p as f64 / q as f64,
            Gamma::Real(g) => g,
        }
    }

    /// `N gamma` and the numerator angle `2 pi frac(N gamma)`, or an error
    /// when `N gamma` is an integer.
    fn numerator_angle(&self, n: usize) -> Result<f64> {
        match *self {
            Gamma::Rational { p, q } => {
                let s = (n as i128 * p as i128).rem_euclid(q as i128);
                if s == 0 {
                    return Err(Error::DegenerateGamma {
                        n_gamma: n as f64 * self.value(),
                    });
                }
                Ok(TAU * s as f64 / q as f64)
            }
            Gamma::Real(g) => {
                let x = n as f64 * g;
                if !x.is_finite() || (x - x.round()).abs() < GAMMA_INTEGER_TOL {
                    return Err(Error::DegenerateGamma { n_gamma: x });
                }
                Ok(TAU * x.rem_euclid(1.0))
            }
        }
    }

    /// Angle `2 pi (d + N gamma)/N` reduced to `[0, 2 pi)`.
    fn denominator_angle(&self, n: usize, d: i64) -> f64 {
        match *self {
            Gamma::Rational { p, q } => {
                let period = n as i128 * q as i128;
                let t = (d as i128 * q as i128 + n as i128 * p as i128).rem_euclid(period);
                TAU * (t as f64 / period as f64)
            }
            Gamma::Real(g) => TAU * ((d as f64 + n as f64 * g) / n as f64).rem_euclid(1.0),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Rational { p, q } => write!(f, "{p}/{q}"),
            Gamma::Real(g) => write!(f, "{g}"),
        }
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Gamma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse gamma '{s}'"));
        match s.split_once('/') {
            Some((p, q)) => Gamma::rational(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => {
                let g: f64 = s.trim().parse().map_err(|_| bad())?;
                if !g.is_finite() {
                    return Err(bad());
                }
                Ok(Gamma::Real(g))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsrmParams {
    pub n: usize,
    pub gamma: Gamma,
    pub seed: u64,
}

/// `(1 - e^{ia}) / (1 - e^{ib})` written with half angles, which keeps full
/// relative precision for small angles.
fn chord_ratio(a: f64, b: f64) -> Complex64 {
    let (sa, sb) = ((a / 2.0).sin(), (b / 2.0).sin());
    Complex64::from_polar(sa / sb, (a - b) / 2.0)
}

/// `U_kl = e^{i phi_k}/N (1 - e^{2 pi i N gamma}) / (1 - e^{2 pi i (k - l + N gamma)/N})`.
pub fn isrm_matrix(n: usize, gamma: Gamma, phases: &[f64]) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(out_of_range("N", n as f64, "need N >= 2"));
    }
    if phases.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: phases.len(),
        });
    }
    let a = gamma.numerator_angle(n)?;
    // the kernel depends on k - l only
    let mut kernel = Vec::with_capacity(2 * n - 1);
    for d in -(n as i64 - 1)..n as i64 {
        let b = gamma.denominator_angle(n, d);
        if 2.0 * (b / 2.0).sin().abs() < MIN_DENOMINATOR {
            return Err(Error::DegenerateGamma {
                n_gamma: n as f64 * gamma.value(),
            });
        }
        kernel.push(chord_ratio(a, b) / n as f64);
    }
    let rows: Vec<Complex64> = phases.iter().map(|&phi| Complex64::from_polar(1.0, phi)).collect();
    let u = ComplexMatrix::from_fn(n, n, |k, l| rows[k] * kernel[k + n - 1 - l]);
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NonUnitaryInput { deviation: defect });
    }
    Ok(u)
}

/// Random matrix of realization `realization`, phases uniform on `[0, 2 pi)`.
pub fn isrm_sample(p: &IsrmParams, realization: u64) -> Result<ComplexMatrix> {
    if p.n > MAX_ISRM_DIM {
        return Err(Error::TooLarge(format!("map dimension {} (limit {MAX_ISRM_DIM})", p.n)));
    }
    let mut rng = stream_rng(p.seed, streams::REALIZATION, realization);
    let phases: Vec<f64> = (0..p.n).map(|_| TAU * rng.random::<f64>()).collect();
    isrm_matrix(p.n, p.gamma, &phases)
}

/// Eigenvectors of one realization of the map; eigenvalues are unimodular.
pub fn isrm_eigvectors(p: &IsrmParams, realization: u64) -> Result<ModelSpectrum<Complex64>> {
    let u = isrm_sample(p, realization)?;
    let eig = unitary_eig(&u)?;
    let vecs = eig.eigenvectors.as_ref().expect("unitary_eig returns vectors");
    let states = (0..p.n)
        .map(|k| PureState::normalized(vecs.column(k)))
        .collect::<Result<_>>()?;
    Ok(ModelSpectrum {
        eigenvalues: eig.eigenvalues,
        states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndersonParams {
    pub n_sites: usize,
    /// Standard deviation of the on-site energies.
    pub w: f64,
    pub seed: u64,
}

/// One realization of the tight-binding chain with unit hopping.
#[derive(Debug, Clone, PartialEq)]
pub struct AndersonChain {
    onsite: Vec<f64>,
}

impl AndersonChain {
    pub fn new(onsite: Vec<f64>) -> Result<Self> {
        if onsite.len() < 2 {
            return Err(out_of_range("N_sites", onsite.len() as f64, "need at least two sites"));
        }
        if onsite.len() > MAX_ANDERSON_SITES {
            return Err(Error::TooLarge(format!(
                "chain of {} sites (limit {MAX_ANDERSON_SITES})",
                onsite.len()
            )));
        }
        Ok(Self { onsite })
    }

    pub fn sample(p: &AndersonParams, realization: u64) -> Result<Self> {
        if !(p.w.is_finite() && p.w >= 0.0) {
            return Err(out_of_range("w", p.w, "must be finite and non-negative"));
        }
        let normal = Normal::new(0.0, p.w).expect("valid standard deviation");
        if p.n_sites > MAX_ANDERSON_SITES {
            return Err(Error::TooLarge(format!(
                "chain of {} sites (limit {MAX_ANDERSON_SITES})",
                p.n_sites
            )));
        }
        let mut rng = stream_rng(p.seed, streams::REALIZATION, realization);
        Self::new((0..p.n_sites).map(|_| normal.sample(&mut rng)).collect())
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn spectrum(&self, window: SpectralWindow) -> Result<ModelSpectrum<f64>> {
        let n = self.onsite.len();
        let eig = tridiagonal_sym_eig(&self.onsite, &vec![1.0; n - 1], true)?;
        real_states(&eig, window.range(n)?)
    }
}

pub fn anderson_eigvectors(p: &AndersonParams, realization: u64, window: SpectralWindow) -> Result<ModelSpectrum<f64>> {
    AndersonChain::sample(p, realization)?.spectrum(window)
}

/// Eigenvalues of the clean chain: `2 cos(pi k/(N+1))`, `k = 1..=N`, ascending.
pub fn clean_chain_levels(n_sites: usize) -> Vec<f64> {
    (1..=n_sites)
        .rev()
        .map(|k| 2.0 * (PI * k as f64 / (n_sites as f64 + 1.0)).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::moments;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn single_spin_levels() {
        let s = SpinModel::new(vec![0.7], vec![]).unwrap().spectrum().unwrap();
        close(s.eigenvalues[0], -0.7, 1e-14);
        close(s.eigenvalues[1], 0.7, 1e-14);
        // +G belongs to |0>
        close(s.states[1].amplitudes()[0].norm(), 1.0, 1e-14);
    }

    #[test]
    fn xx_pair_levels() {
        let s = SpinModel::new(vec![0.0, 0.0], vec![(0, 1, 1.3)])
            .unwrap()
            .spectrum()
            .unwrap();
        for (got, want) in s.eigenvalues.iter().zip([-1.3, -1.3, 1.3, 1.3]) {
            close(*got, want, 1e-13);
        }
    }

    #[test]
    fn spin_hamiltonian_structure() {
        let p = SpinModelParams::from_ratios(5, 1.0, 1.5, 3);
        let m = SpinModel::sample(&p, 0).unwrap();
        for g in m.fields() {
            assert!((0.5..=1.5).contains(g));
        }
        for &(_, _, c) in m.couplings() {
            assert!(c.abs() <= 1.5);
        }
        let h = m.hamiltonian();
        assert_eq!(h.hermiticity_defect(), 0.0);
        // trace of Z and XX terms vanishes
        close(h.trace(), 0.0, 1e-12);
        assert_eq!(SpinModel::sample(&p, 0).unwrap(), m);
        assert_ne!(SpinModel::sample(&p, 1).unwrap(), m);
    }

    #[test]
    fn spin_eigenvectors_are_orthonormal() {
        let p = SpinModelParams::from_ratios(6, 1.0, 1.5, 9);
        let model = SpinModel::sample(&p, 2).unwrap();
        let s = model.spectrum().unwrap();
        assert_eq!(s.len(), 64);
        let h = model.hamiltonian();
        let mut worst = 0.0f64;
        for (a, sa) in s.states.iter().enumerate() {
            let hv: Vec<f64> = h
                .mul_vec(&sa.amplitudes().iter().map(|c| c.re).collect::<Vec<_>>())
                .unwrap();
            for (x, y) in hv.iter().zip(sa.amplitudes()) {
                worst = worst.max((x - s.eigenvalues[a] * y.re).abs());
            }
            for sb in &s.states[a..] {
                let dot: Complex64 = sa
                    .amplitudes()
                    .iter()
                    .zip(sb.amplitudes())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let want = if std::ptr::eq(sa, sb) { 1.0 } else { 0.0 };
                assert!((dot.norm() - want).abs() < 1e-8);
            }
        }
        assert!(worst < 1e-10);
    }

    #[test]
    fn spin_size_limits() {
        assert!(matches!(
            spin_eigvectors(&SpinModelParams::from_ratios(13, 1.0, 1.0, 0), 0),
            Err(Error::TooLarge(_))
        ));
        assert!(spin_eigvectors(&SpinModelParams::from_ratios(0, 1.0, 1.0, 0), 0).is_err());
        assert!(SpinModel::new(vec![0.0; 3], vec![(2, 1, 1.0)]).is_err());
    }

    #[test]
    fn gamma_parsing() {
        assert_eq!("1/3".parse::<Gamma>().unwrap(), Gamma::Rational { p: 1, q: 3 });
        assert_eq!("0.25".parse::<Gamma>().unwrap(), Gamma::Real(0.25));
        assert!("1/0".parse::<Gamma>().is_err());
        assert!("x".parse::<Gamma>().is_err());
        assert_eq!(Gamma::Rational { p: 2, q: 7 }.to_string(), "2/7");
    }

    #[test]
    fn isrm_two_by_two_is_balanced() {
        let u = isrm_matrix(2, Gamma::Rational { p: 1, q: 4 }, &[0.0, 0.0]).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                close(u[(k, l)].norm_sqr(), 0.5, 1e-15);
            }
        }
    }

    #[test]
    fn isrm_is_unitary() {
        let cases = [
            (4, Gamma::Rational { p: 1, q: 3 }),
            (64, Gamma::Rational { p: 1, q: 3 }),
            (100, Gamma::Rational { p: 1, q: 7 }),
            (37, Gamma::Rational { p: -2, q: 5 }),
            (50, Gamma::Real(0.1234)),
            (256, Gamma::Real(std::f64::consts::FRAC_1_SQRT_2)),
        ];
        for (n, gamma) in cases {
            let u = isrm_sample(&IsrmParams { n, gamma, seed: 4 }, 0).unwrap();
            assert!(u.unitarity_defect() <= 1e-10, "n={n} gamma={gamma}");
            for k in 0..n {
                let row: f64 = u.row(k).iter().map(|x| x.norm_sqr()).sum();
                close(row, 1.0, 1e-10);
            }
        }
    }

    #[test]
    fn isrm_degenerate_gamma_refused() {
        for (n, g) in [
            (6, Gamma::Rational { p: 1, q: 3 }),
            (8, Gamma::Rational { p: 1, q: 2 }),
            (4, Gamma::Real(0.25)),
        ] {
            assert!(matches!(
                isrm_matrix(n, g, &vec![0.0; n]),
                Err(Error::DegenerateGamma { .. })
            ));
        }
        assert!(isrm_matrix(4, Gamma::Real(0.25 + 1e-12), &[0.0; 4]).is_err());
        assert!(isrm_matrix(4, Gamma::Rational { p: 1, q: 3 }, &[0.0; 3]).is_err());
    }

    #[test]
    fn isrm_eigenvectors() {
        let p = IsrmParams {
            n: 64,
            gamma: Gamma::Rational { p: 1, q: 3 },
            seed: 1,
        };
        let u = isrm_sample(&p, 0).unwrap();
        let s = isrm_eigvectors(&p, 0).unwrap();
        assert_eq!(s.len(), 64);
        for (lambda, v) in s.eigenvalues.iter().zip(&s.states) {
            close(lambda.norm(), 1.0, 1e-8);
            let uv = u.mul_vec(v.amplitudes()).unwrap();
            let res = uv
                .iter()
                .zip(v.amplitudes())
                .map(|(a, b)| (a - lambda * b).norm())
                .fold(0.0, f64::max);
            assert!(res <= 1e-8 * 8.0);
        }
    }

    #[test]
    fn clean_chain() {
        let c = AndersonChain::sample(
            &AndersonParams {
                n_sites: 4,
                w: 0.0,
                seed: 0,
            },
            0,
        )
        .unwrap();
        let s = c.spectrum(SpectralWindow::Full).unwrap();
        for (got, want) in s.eigenvalues.iter().zip(clean_chain_levels(4)) {
            close(*got, want, 1e-14);
        }
        close(clean_chain_levels(4)[3], 2.0 * (PI / 5.0).cos(), 1e-15);
    }

    #[test]
    fn anderson_localizes() {
        let p = AndersonParams {
            n_sites: 512,
            w: 2.0,
            seed: 5,
        };
        let s = anderson_eigvectors(&p, 0, SpectralWindow::CENTRAL_HALF).unwrap();
        assert_eq!(s.len(), 256);
        let mean_xi = s.states.iter().map(|v| moments(v, 2).unwrap().xi).sum::<f64>() / s.len() as f64;
        assert!(mean_xi < 512.0 / 16.0, "mean xi = {mean_xi}");
        for v in &s.states {
            assert!(v.amplitudes().iter().all(|a| a.im == 0.0));
        }
    }

    #[test]
    fn anderson_onsite_statistics() {
        let c = AndersonChain::sample(
            &AndersonParams {
                n_sites: 4096,
                w: 1.5,
                seed: 11,
            },
            3,
        )
        .unwrap();
        let n = c.onsite().len() as f64;
        let mean = c.onsite().iter().sum::<f64>() / n;
        let var = c.onsite().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 * 1.5 / n.sqrt());
        assert!((var.sqrt() - 1.5).abs() < 0.05);
    }

    #[test]
    fn windows() {
        assert_eq!(SpectralWindow::Full.range(10).unwrap(), 0..10);
        assert_eq!(SpectralWindow::CENTRAL_HALF.range(8).unwrap(), 2..6);
        assert_eq!(
            "central50".parse::<SpectralWindow>().unwrap(),
            SpectralWindow::CENTRAL_HALF
        );
        assert!("central0".parse::<SpectralWindow>().is_err());
        assert_eq!(SpectralWindow::CENTRAL_HALF.to_string(), "central50");
        assert!(AndersonChain::new(vec![0.0]).is_err());
        assert!(AndersonChain::sample(
            &AndersonParams {
                n_sites: 8,
                w: -1.0,
                seed: 0
            },
            0
        )
        .is_err());
    }

    #[test]
    fn non_power_of_two_chain_has_no_qubits() {
        let s = anderson_eigvectors(
            &AndersonParams {
                n_sites: 6,
                w: 1.0,
                seed: 0,
            },
            0,
            SpectralWindow::Full,
        )
        .unwrap();
        assert!(matches!(
            crate::entanglement::tangle(&s.states[0], 0),
            Err(Error::NotPowerOfTwo(6))
        ));
    }
}
