//! Localization observables: moments `p_q = sum_i |psi_i|^{2q}`, the inverse
//! participation ratio `xi = 1/p_2`, and effective multifractal dimensions.

use crate::error::{Error, Result};
use crate::states::PureState;
use crate::sum::Compensated;

const NORM_TOL: f64 = 1e-9;

/// Moments `p_2..=p_{q_max}` of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    /// `p[k]` is `p_{k+2}`.
    p: Vec<f64>,
    pub xi: f64,
}

impl MomentSet {
    pub fn q_max(&self) -> usize {
        self.p.len() + 1
    }

    /// `p_q`; panics if `q` is outside `2..=q_max`.
    pub fn p(&self, q: usize) -> f64 {
        assert!(q >= 2 && q <= self.q_max(), "moment order {q} not computed");
        self.p[q - 2]
    }

    pub fn get(&self, q: usize) -> Option<f64> {
        q.checked_sub(2).and_then(|k| self.p.get(k).copied())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

/// Moments `p_2..=p_{q_max}` with compensated summation.
pub fn moments(state: &PureState, q_max: usize) -> Result<MomentSet> {
    if q_max < 2 {
        return Err(crate::error::out_of_range("q_max", q_max as f64, "must be at least 2"));
    }
    let mut norm = Compensated::default();
    let mut acc = vec![Compensated::default(); q_max - 1];
    for w in state.probabilities() {
        norm.add(w);
        let mut wq = w;
        for a in acc.iter_mut() {
            wq *= w;
            a.add(wq);
        }
    }
    let norm_sqr = norm.value();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let p: Vec<f64> = acc.iter().map(Compensated::value).collect();
    Ok(MomentSet { xi: 1.0 / p[0], p })
}

/// Log-log fit of an ensemble-averaged moment against system size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub q: usize,
    /// `D_q` in `<p_q> ~ N^{-D_q (q-1)}`: 1 for ergodic, 0 for localized.
    pub exponent: f64,
    /// Intercept of `ln <p_q>` vs `ln N`.
    pub intercept: f64,
    /// RMS residual of the fit in `ln <p_q>`.
    pub residual: f64,
}

/// Least-squares fit of `ln <p_q>` against `ln N` over `points = (N, <p_q>)`.
pub fn multifractal_fit(points: &[(f64, f64)], q: usize) -> Result<ScalingFit> {
    if q < 2 {
        return Err(crate::error::out_of_range("q", q as f64, "must be at least 2"));
    }
    let mut sizes: Vec<f64> = points.iter().map(|p| p.0).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: sizes.len(),
        });
    }
    if let Some(&(n, p)) = points.iter().find(|(n, p)| !(*p > 0.0 && *n > 0.0)) {
        return Err(crate::error::out_of_range(
            if p > 0.0 { "N" } else { "mean_p_q" },
            if p > 0.0 { n } else { p },
            "must be positive",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(ScalingFit {
        q,
        exponent: -slope / (q as f64 - 1.0),
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::states::{cue_state, shuffle_components};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn basis_state() {
        let m = moments(&PureState::basis(8, 5).unwrap(), 4).unwrap();
        for q in 2..=4 {
            assert_eq!(m.p(q), 1.0);
        }
        assert_eq!(m.xi, 1.0);
    }

    #[test]
    fn flat_state_on_four_of_sixteen() {
        let mut amps = vec![0.0; 16];
        for i in [1, 4, 9, 15] {
            amps[i] = 0.5;
        }
        let m = moments(&PureState::from_real(&amps).unwrap(), 3).unwrap();
        assert!((m.p(2) - 0.25).abs() < 1e-15);
        assert!((m.p(3) - 1.0 / 16.0).abs() < 1e-15);
        assert!((m.xi - 4.0).abs() < 1e-13);
        assert_eq!(m.get(4), None);
    }

    #[test]
    fn bell_state() {
        let m = moments(&PureState::ghz(2).unwrap(), 2).unwrap();
        assert!((m.p(2) - 0.5).abs() < 1e-15);
        assert!((m.xi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_unnormalized_and_bad_order() {
        let s = PureState::basis(2, 0).unwrap();
        assert!(moments(&s, 1).is_err());
    }

    #[test]
    fn ergodic_and_localized_scaling() {
        let ergodic: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0].iter().map(|&n| (n, 1.0 / n)).collect();
        let fit = multifractal_fit(&ergodic, 2).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        let localized: Vec<(f64, f64)> = [64.0, 128.0, 256.0].iter().map(|&n| (n, 0.3)).collect();
        assert!(multifractal_fit(&localized, 2).unwrap().exponent.abs() < 1e-12);
        // q = 3 convention: p_3 ~ N^{-2 D_3}
        let cubic: Vec<(f64, f64)> = [64.0f64, 128.0, 256.0].iter().map(|&n| (n, n.powf(-1.4))).collect();
        assert!((multifractal_fit(&cubic, 3).unwrap().exponent - 0.7).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_three_sizes() {
        let pts = [(64.0, 0.1), (64.0, 0.11), (128.0, 0.05)];
        assert!(matches!(
            multifractal_fit(&pts, 2),
            Err(Error::InsufficientPoints { needed: 3, got: 2 })
        ));
        assert!(multifractal_fit(&[(4.0, 0.1), (8.0, 0.0), (16.0, 0.1)], 2).is_err());
    }

    proptest! {
        #[test]
        fn moment_invariants(seed in any::<u64>(), log_n in 1usize..9) {
            let n = 1 << log_n;
            let mut rng = stream_rng(seed, 0, 0);
            let s = cue_state(n, &mut rng).unwrap();
            let m = moments(&s, 4).unwrap();
            prop_assert!(m.p(2) > 0.0 && m.p(2) <= 1.0);
            prop_assert!(m.p(3) <= m.p(2) && m.p(4) <= m.p(3));
            prop_assert!(m.p(3) >= m.p(2) * m.p(2) * (1.0 - 1e-12));
            prop_assert!(m.xi >= 1.0 && m.xi <= n as f64 * (1.0 + 1e-12));

            let sh = shuffle_components(&s, &mut rng);
            let ms = moments(&sh, 4).unwrap();
            for q in 2..=4 {
                prop_assert!((ms.p(q) - m.p(q)).abs() <= 1e-15 * m.p(q).max(1e-300) * 4.0);
            }

            let phased: Vec<Complex64> = s.amplitudes().iter().enumerate()
                .map(|(i, a)| a * Complex64::from_polar(1.0, 0.37 * i as f64)).collect();
            let mp = moments(&PureState::new(phased).unwrap(), 4).unwrap();
            for q in 2..=4 {
                prop_assert!((mp.p(q) - m.p(q)).abs() <= 1e-15);
            }
        }
    }
}
