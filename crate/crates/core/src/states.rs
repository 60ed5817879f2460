//! Pure states and the random-vector ensembles sampled from them.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Normalized amplitude vector over a computational basis.
///
/// Basis label `i` reads as an `n`-bit string with qubit 0 as the most
/// significant bit. Dimensions that are not powers of two (e.g. Anderson
/// chains) carry no qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: Option<usize>,
    amplitudes: Vec<Complex64>,
}

/// `log2(dim)` if `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

impl PureState {
    /// Wrap already-normalized amplitudes (checked to `1e-9`).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        let norm_sqr = norm_sqr(&amplitudes);
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self {
            n_qubits: qubit_count(amplitudes.len()),
            amplitudes,
        })
    }

    /// Normalize `amplitudes` and wrap them.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sqr = norm_sqr(&amplitudes);
        if !(norm_sqr.is_finite() && norm_sqr > 0.0) {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let inv = norm_sqr.sqrt().recip();
        for a in &mut amplitudes {
            *a *= inv;
        }
        Self::new(amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amps = vec![Complex64::default(); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        let mut amps = vec![0.0; dim];
        amps[0] = 1.0;
        amps[dim - 1] = 1.0;
        Self::from_real(&amps)
    }

    /// Equal superposition of the `n` single-excitation basis states.
    pub fn w(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        let mut amps = vec![0.0; dim];
        for q in 0..n {
            amps[1 << q] = 1.0;
        }
        Self::from_real(&amps)
    }

    /// Tensor product `self (x) other`; `self` supplies the leading qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        Self::normalized(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> Option<usize> {
        self.n_qubits
    }

    /// Qubit count, or [`Error::NotPowerOfTwo`] for non-qubit dimensions.
    pub fn require_qubits(&self) -> Result<usize> {
        self.n_qubits.ok_or(Error::NotPowerOfTwo(self.dim()))
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|a| a.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Number of amplitudes that are exactly zero.
    pub fn zero_count(&self) -> usize {
        self.amplitudes.iter().filter(|a| **a == Complex64::default()).count()
    }
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    crate::sum::compensated_sum(amps.iter().map(|a| a.norm_sqr()))
}

/// Where the nonzero components of a localized vector sit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupportKind {
    /// All `N` components.
    Full,
    /// `M` distinct positions drawn uniformly without replacement.
    RandomSubset,
    /// `M` consecutive labels `start, start+1, ...`. With `wrap` the window
    /// is cyclic (labels taken mod `N`, start uniform in `0..N`); without it
    /// the start is uniform in `0..=N-M`.
    AdjacentWindow { wrap: bool },
    /// Fixed positions, used as given.
    Pinned(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSpec {
    pub kind: SupportKind,
    /// Support size `M`.
    pub size: usize,
    /// Window start for [`SupportKind::AdjacentWindow`]; drawn when `None`.
    pub start: Option<usize>,
}

impl SupportSpec {
    pub fn full(n: usize) -> Self {
        Self {
            kind: SupportKind::Full,
            size: n,
            start: None,
        }
    }

    pub fn random_subset(m: usize) -> Self {
        Self {
            kind: SupportKind::RandomSubset,
            size: m,
            start: None,
        }
    }

    pub fn adjacent(m: usize) -> Self {
        Self {
            kind: SupportKind::AdjacentWindow { wrap: true },
            size: m,
            start: None,
        }
    }

    pub fn adjacent_no_wrap(m: usize) -> Self {
        Self {
            kind: SupportKind::AdjacentWindow { wrap: false },
            size: m,
            start: None,
        }
    }

    pub fn pinned(positions: Vec<usize>) -> Self {
        Self {
            size: positions.len(),
            kind: SupportKind::Pinned(positions),
            start: None,
        }
    }

    /// Draw the support positions for dimension `n`.
    pub fn positions<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        let m = self.size;
        if m == 0 {
            return Err(Error::InvalidSpec("support size must be at least 1".into()));
        }
        if m > n {
            return Err(Error::SupportTooLarge { m, n });
        }
        match &self.kind {
            SupportKind::Full => Ok((0..n).collect()),
            SupportKind::RandomSubset => {
                let mut pos = index::sample(rng, n, m).into_vec();
                pos.sort_unstable();
                Ok(pos)
            }
            SupportKind::AdjacentWindow { wrap } => {
                let span = if *wrap { n } else { n - m + 1 };
                let start = match self.start {
                    Some(s) if s < span => s,
                    Some(s) => {
                        return Err(Error::InvalidSpec(format!(
                            "window start {s} leaves no room for {m} sites in {n}"
                        )))
                    }
                    None => rng.random_range(0..span),
                };
                Ok((start..start + m).map(|i| i % n).collect())
            }
            SupportKind::Pinned(pos) => {
                let mut seen = vec![false; n];
                for &p in pos {
                    if p >= n || std::mem::replace(&mut seen[p], true) {
                        return Err(Error::InvalidSpec(format!(
                            "pinned support position {p} is out of range or repeated"
                        )));
                    }
                }
                Ok(pos.clone())
            }
        }
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, TAU * rng.random::<f64>())
}

/// Haar-random state on the complex unit sphere of dimension `n`
/// (a CUE column): normalized i.i.d. complex Gaussians.
pub fn cue_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    PureState::normalized((0..n).map(|_| complex_gaussian(rng)).collect())
}

/// CUE vector of length `M` placed on the support described by `support`,
/// zero elsewhere.
pub fn localized_cue_state<R: Rng + ?Sized>(n: usize, support: &SupportSpec, rng: &mut R) -> Result<PureState> {
    let pos = support.positions(n, rng)?;
    let mut amps = vec![Complex64::default(); n];
    for &p in &pos {
        amps[p] = complex_gaussian(rng);
    }
    PureState::normalized(amps)
}

/// Equal moduli `1/sqrt(M)` with i.i.d. uniform phases on the support.
pub fn phase_state<R: Rng + ?Sized>(n: usize, support: &SupportSpec, rng: &mut R) -> Result<PureState> {
    let pos = support.positions(n, rng)?;
    let modulus = (pos.len() as f64).sqrt().recip();
    let mut amps = vec![Complex64::default(); n];
    for &p in &pos {
        amps[p] = random_phase(rng) * modulus;
    }
    PureState::new(amps)
}

/// Complex Gaussian amplitudes under the envelope `exp(-d(i, i0)/l)`, with
/// `i0` uniform and `d` the cyclic distance, then normalized.
pub fn exp_envelope_cue_state<R: Rng + ?Sized>(n: usize, l: f64, rng: &mut R) -> Result<PureState> {
    if l.is_nan() || l <= 0.0 {
        return Err(crate::error::out_of_range(
            "l",
            l,
            "localization length must be positive",
        ));
    }
    if n == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    let center = rng.random_range(0..n);
    let amps = (0..n)
        .map(|i| {
            let d = i.abs_diff(center);
            let d = d.min(n - d) as f64;
            complex_gaussian(rng) * (-d / l).exp()
        })
        .collect();
    PureState::normalized(amps)
}

/// Permute the amplitudes by a uniform random permutation.
pub fn shuffle_components<R: Rng + ?Sized>(state: &PureState, rng: &mut R) -> PureState {
    let mut amps = state.amplitudes.clone();
    amps.shuffle(rng);
    PureState {
        n_qubits: state.n_qubits,
        amplitudes: amps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::moments;
    use crate::rng::stream_rng;

    #[test]
    fn one_dimensional_cue_is_a_phase() {
        let s = cue_state(1, &mut stream_rng(1, 0, 0)).unwrap();
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.n_qubits(), Some(0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = cue_state(16, &mut stream_rng(7, 1, 0)).unwrap();
        let b = cue_state(16, &mut stream_rng(7, 1, 0)).unwrap();
        assert_eq!(a, b);
        let c = cue_state(16, &mut stream_rng(7, 1, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn localized_cue_has_exact_support() {
        let mut rng = stream_rng(3, 0, 0);
        for _ in 0..50 {
            let s = localized_cue_state(64, &SupportSpec::random_subset(5), &mut rng).unwrap();
            assert_eq!(s.zero_count(), 59);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_site_support_is_basis_state() {
        let mut rng = stream_rng(3, 0, 1);
        let s = localized_cue_state(32, &SupportSpec::random_subset(1), &mut rng).unwrap();
        assert_eq!(s.zero_count(), 31);
        let m = moments(&s, 4).unwrap();
        assert!((m.p(4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_too_large() {
        let mut rng = stream_rng(3, 0, 2);
        assert!(matches!(
            phase_state(8, &SupportSpec::random_subset(9), &mut rng),
            Err(Error::SupportTooLarge { m: 9, n: 8 })
        ));
        assert!(matches!(
            localized_cue_state(8, &SupportSpec::adjacent(9), &mut rng),
            Err(Error::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn phase_state_moduli() {
        let mut rng = stream_rng(5, 0, 0);
        let s = phase_state(16, &SupportSpec::random_subset(4), &mut rng).unwrap();
        assert_eq!(s.zero_count(), 12);
        for p in s.probabilities().filter(|&p| p > 0.0) {
            assert!((p - 0.25).abs() < 1e-15);
        }
        let full = phase_state(8, &SupportSpec::full(8), &mut rng).unwrap();
        assert!((moments(&full, 2).unwrap().p(2) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn adjacent_windows() {
        let mut rng = stream_rng(5, 0, 1);
        let pinned = SupportSpec {
            start: Some(6),
            ..SupportSpec::adjacent(4)
        };
        assert_eq!(pinned.positions(8, &mut rng).unwrap(), vec![6, 7, 0, 1]);
        let straight = SupportSpec {
            start: Some(4),
            ..SupportSpec::adjacent_no_wrap(4)
        };
        assert_eq!(straight.positions(8, &mut rng).unwrap(), vec![4, 5, 6, 7]);
        let bad = SupportSpec {
            start: Some(5),
            ..SupportSpec::adjacent_no_wrap(4)
        };
        assert!(bad.positions(8, &mut rng).is_err());
        for _ in 0..100 {
            let p = SupportSpec::adjacent_no_wrap(3).positions(8, &mut rng).unwrap();
            assert!(p[2] == p[0] + 2 && p[2] < 8);
        }
    }

    #[test]
    fn pinned_support_validation() {
        let mut rng = stream_rng(5, 0, 2);
        assert!(SupportSpec::pinned(vec![1, 1]).positions(4, &mut rng).is_err());
        assert!(SupportSpec::pinned(vec![4]).positions(4, &mut rng).is_err());
        assert_eq!(
            SupportSpec::pinned(vec![3, 0]).positions(4, &mut rng).unwrap(),
            vec![3, 0]
        );
    }

    #[test]
    fn extreme_envelope_is_basis_like() {
        let mut rng = stream_rng(9, 0, 0);
        let s = exp_envelope_cue_state(256, 0.01, &mut rng).unwrap();
        let xi = moments(&s, 2).unwrap().xi;
        assert!((xi - 1.0).abs() < 1e-12);
        assert!(exp_envelope_cue_state(16, 0.0, &mut rng).is_err());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = stream_rng(2, 0, 0);
        let basis = PureState::basis(16, 3).unwrap();
        let sh = shuffle_components(&basis, &mut rng);
        assert_eq!(sh.zero_count(), 15);
        let s = cue_state(64, &mut rng).unwrap();
        let a = shuffle_components(&s, &mut stream_rng(2, 1, 0));
        let b = shuffle_components(&s, &mut stream_rng(2, 1, 0));
        assert_eq!(a, b);
        let mut x: Vec<f64> = s.probabilities().collect();
        let mut y: Vec<f64> = a.probabilities().collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        assert_eq!(x, y);
    }

    #[test]
    fn named_states() {
        let ghz = PureState::ghz(3).unwrap();
        assert!((ghz.amplitudes()[7].re - 0.5f64.sqrt()).abs() < 1e-15);
        let w = PureState::w(3).unwrap();
        assert_eq!(w.zero_count(), 5);
        assert!(PureState::new(vec![Complex64::new(2.0, 0.0)]).is_err());
    }
}
