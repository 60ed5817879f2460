//! Closed-form predictions for ensemble averages of entanglement.
//!
//! Every function here is a deterministic scalar formula; these values are
//! the reference columns of the Monte Carlo harness.

use std::f64::consts::LN_2;

use crate::error::{out_of_range, Error, Result};

/// Relative slack for moment inputs that come from Monte Carlo averages.
const MOMENT_SLACK: f64 = 1e-12;

fn check_dim(n: usize, min: usize) -> Result<f64> {
    if n < min {
        return Err(out_of_range("N", n as f64, "dimension too small for this formula"));
    }
    Ok(n as f64)
}

fn check_support(n: usize, m: usize) -> Result<(f64, f64)> {
    if m < 1 || m > n {
        return Err(out_of_range("M", m as f64, "support size must satisfy 1 <= M <= N"));
    }
    Ok((n as f64, m as f64))
}

fn check_p2(n: f64, p2: f64) -> Result<f64> {
    let lo = 1.0 / n;
    if !(p2 >= lo * (1.0 - MOMENT_SLACK) && p2 <= 1.0 + MOMENT_SLACK) {
        return Err(out_of_range("mean_p2", p2, "must lie in [1/N, 1]"));
    }
    Ok(p2.clamp(lo, 1.0))
}

/// `<tau> = (N-2)/(N-1) (1 - <p_2>)` for a `(1, n-1)` cut.
pub fn predict_tau_mean(n: usize, mean_p2: f64) -> Result<f64> {
    let nf = check_dim(n, 2)?;
    let p2 = check_p2(nf, mean_p2)?;
    Ok((nf - 2.0) / (nf - 1.0) * (1.0 - p2))
}

/// `<tau>` for CUE vectors on `M` of `N` basis states (`xi = (M+1)/2`).
pub fn predict_tau_localized_cue(n: usize, m: usize) -> Result<f64> {
    check_dim(n, 2)?;
    let (nf, mf) = check_support(n, m)?;
    Ok((mf - 1.0) / (mf + 1.0) * (nf - 2.0) / (nf - 1.0))
}

/// `<tau>` for equal-modulus random-phase vectors on `M` of `N` states.
pub fn predict_tau_phase(n: usize, m: usize) -> Result<f64> {
    check_dim(n, 2)?;
    let (nf, mf) = check_support(n, m)?;
    Ok((mf - 1.0) / mf * (nf - 2.0) / (nf - 1.0))
}

/// Ensemble averages `<p_2>, <p_3>, <p_4>, <p_2^2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentInputs {
    pub mean_p2: f64,
    pub mean_p3: f64,
    pub mean_p4: f64,
    pub mean_p2_sq: f64,
}

impl MomentInputs {
    pub fn new(mean_p2: f64, mean_p3: f64, mean_p4: f64, mean_p2_sq: f64) -> Result<Self> {
        let m = Self {
            mean_p2,
            mean_p3,
            mean_p4,
            mean_p2_sq,
        };
        m.validate()?;
        Ok(m)
    }

    /// Moments of a vector spread with equal weight on `m` states.
    pub fn flat(m: usize) -> Self {
        let inv = 1.0 / m as f64;
        Self {
            mean_p2: inv,
            mean_p3: inv * inv,
            mean_p4: inv * inv * inv,
            mean_p2_sq: inv * inv,
        }
    }

    /// Haar averages for a CUE vector of length `m` (Dirichlet moments of
    /// the weights `|c_i|^2`).
    pub fn haar(m: usize) -> Self {
        let m = m as f64;
        let (a, b, c) = (m + 1.0, m + 2.0, m + 3.0);
        Self {
            mean_p2: 2.0 / a,
            mean_p3: 6.0 / (a * b),
            mean_p4: 24.0 / (a * b * c),
            mean_p2_sq: 4.0 * (m + 5.0) / (a * b * c),
        }
    }

    fn validate(&self) -> Result<()> {
        let vals = [
            ("mean_p2", self.mean_p2),
            ("mean_p3", self.mean_p3),
            ("mean_p4", self.mean_p4),
            ("mean_p2_sq", self.mean_p2_sq),
        ];
        for (name, v) in vals {
            if !(v > 0.0 && v <= 1.0 + MOMENT_SLACK) {
                return Err(out_of_range(name, v, "moments must lie in (0, 1]"));
            }
        }
        let slack = 1.0 + MOMENT_SLACK;
        if self.mean_p2_sq * slack < self.mean_p2 * self.mean_p2 {
            return Err(out_of_range(
                "mean_p2_sq",
                self.mean_p2_sq,
                "must be at least mean_p2^2",
            ));
        }
        if self.mean_p4 > self.mean_p3 * slack || self.mean_p3 > self.mean_p2 * slack {
            return Err(out_of_range(
                "mean_p3",
                self.mean_p3,
                "need mean_p4 <= mean_p3 <= mean_p2",
            ));
        }
        Ok(())
    }
}

/// Pair/triple/quadruple correlators `(c_22, c_211, c_1111)`.
pub fn correlators(n: usize, m: &MomentInputs) -> Result<(f64, f64, f64)> {
    let nf = check_dim(n, 4)?;
    m.validate()?;
    let MomentInputs {
        mean_p2: p2,
        mean_p3: p3,
        mean_p4: p4,
        mean_p2_sq: p22,
    } = *m;
    let d2 = nf * (nf - 1.0);
    let d3 = d2 * (nf - 2.0);
    let d4 = d3 * (nf - 3.0);
    let c22 = (p22 - p4) / d2;
    let c211 = (p2 - p22 - 2.0 * p3 + 2.0 * p4) / d3;
    let c1111 = (1.0 - 6.0 * p2 + 8.0 * p3 + 3.0 * p22 - 6.0 * p4) / d4;
    Ok((c22, c211, c1111))
}

/// `<tau^2>` for a `(1, n-1)` cut from moments up to order four.
pub fn predict_tau_second_moment(n: usize, m: &MomentInputs) -> Result<f64> {
    let (c22, c211, c1111) = correlators(n, m)?;
    let nf = n as f64;
    Ok(nf * (nf - 2.0) * (nf * nf - 6.0 * nf + 16.0) * c1111
        + 4.0 * nf * (nf - 2.0) * (nf - 4.0) * c211
        + 4.0 * nf * (nf - 2.0) * c22)
}

/// Mean entropy of a `(1, n-1)` cut of a CUE vector of dimension `N`:
/// `(1/ln 2) sum_{k=N/2+1}^{N-1} 1/k`.
pub fn predict_cue_entropy(n: usize) -> Result<f64> {
    check_dim(n, 4)?;
    if !n.is_multiple_of(2) {
        return Err(out_of_range("N", n as f64, "dimension must be even"));
    }
    let sum: f64 = (n / 2 + 1..n).rev().map(|k| 1.0 / k as f64).sum();
    Ok(sum / LN_2)
}

/// Mean over the ensemble of `S_1` and `S_2`: the tangle expansion with
/// `<tau>` and `<tau^2>` taken from the moment formulas.
pub fn predict_entropy_series(n: usize, m: &MomentInputs, order: usize) -> Result<f64> {
    let tau = predict_tau_mean(n, m.mean_p2)?;
    let first = (1.0 - tau) / 2.0;
    match order {
        1 => Ok(1.0 - first / LN_2),
        2 => {
            let tau2 = predict_tau_second_moment(n, m)?;
            let second = (1.0 - 2.0 * tau + tau2) / 12.0;
            Ok(1.0 - (first + second) / LN_2)
        }
        _ => Err(out_of_range(
            "m",
            order as f64,
            "only orders 1 and 2 are parameterized by moments",
        )),
    }
}

fn nu_dims(n: usize, nu: usize) -> Result<(f64, f64)> {
    let nf = check_dim(n, 2)?;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let qubits = n.trailing_zeros() as usize;
    if nu < 1 || nu >= qubits {
        return Err(out_of_range("nu", nu as f64, "need 1 <= nu <= n-1"));
    }
    Ok((nf, (1u64 << nu) as f64))
}

/// `<S_L> = (N - 2^nu)/(N - 1) (1 - <p_2>)` for a `(nu, n-nu)` cut.
pub fn predict_linear_entropy(n: usize, nu: usize, mean_p2: f64) -> Result<f64> {
    let (nf, d) = nu_dims(n, nu)?;
    let p2 = check_p2(nf, mean_p2)?;
    Ok((nf - d) / (nf - 1.0) * (1.0 - p2))
}

/// Which transcription of the first-order general-cut entropy to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyVariant {
    /// Built from [`predict_linear_entropy`]; reduces to the `(1, n-1)`
    /// result at `nu = 1`.
    Consistent,
    /// Direct transcription `nu - (2^nu-1)/(2 ln 2) (1 - (N-2^nu)/(N-1) <p_2>)`.
    /// Kept for comparison only.
    Literal,
}

/// First-order mean von Neumann entropy of a `(nu, n-nu)` cut.
pub fn predict_entropy_first_order(n: usize, nu: usize, mean_p2: f64, variant: EntropyVariant) -> Result<f64> {
    let (nf, d) = nu_dims(n, nu)?;
    let p2 = check_p2(nf, mean_p2)?;
    let defect = match variant {
        EntropyVariant::Consistent => 1.0 - predict_linear_entropy(n, nu, p2)?,
        EntropyVariant::Literal => 1.0 - (nf - d) / (nf - 1.0) * p2,
    };
    Ok(nu as f64 - (d - 1.0) / (2.0 * LN_2) * defect)
}

/// `chi_r(x) = x^2 - (2/3) x (x^2 - 1) / 2^r` on `0 <= x <= 2^r`, extended by
/// `chi_r(x) = chi_r(2^{r+1} - x)` up to `2^{r+1}`.
pub fn chi_r(r: u32, x: f64) -> Result<f64> {
    let half = 2f64.powi(r as i32);
    if !(0.0..=2.0 * half).contains(&x) {
        return Err(out_of_range("x", x, "chi_r is defined on 0 <= x <= 2^(r+1)"));
    }
    let x = if x > half { 2.0 * half - x } else { x };
    Ok(x * x - 2.0 / 3.0 * x * (x * x - 1.0) / half)
}

/// Evaluation route for adjacent-window vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjacentMode {
    /// Full combinatorial expression with `r0 = ceil(log2 M)` and
    /// `m_r = M mod 2^{r+1}`.
    Exact,
    /// Simplified expression, exact at `M = 2^{r0}`, evaluated with real
    /// `r0 = log2 M` for other `M`.
    PowerOfTwo,
}

/// Whether [`AdjacentMode::Exact`] has been validated against Monte Carlo.
/// Checked by the acceptance suite; turn off to make exact mode refuse.
pub const EXACT_ADJACENT_VALIDATED: bool = true;

/// Mean tangle over all `(1, n-1)` cuts for vectors localized on `M`
/// consecutive basis labels of an `n`-qubit register.
///
/// `m` is real so that envelope widths (`M = 2 xi`) can be plugged in with
/// [`AdjacentMode::PowerOfTwo`]; exact mode needs an integer.
pub fn predict_tau_adjacent(n_qubits: usize, m: f64, mean_p2: f64, mode: AdjacentMode) -> Result<f64> {
    if !(1..=62).contains(&n_qubits) {
        return Err(out_of_range("n", n_qubits as f64, "qubit count must be in 1..=62"));
    }
    let nf = (1u64 << n_qubits) as f64;
    if !(m >= 2.0 && m <= nf / 2.0) {
        return Err(out_of_range("M", m, "adjacent formula needs 2 <= M <= N/2"));
    }
    let p2 = check_p2(nf, mean_p2)?;
    let bracket = match mode {
        AdjacentMode::PowerOfTwo => {
            let r0 = m.log2();
            ((r0 + 4.0 / 3.0) * m * m - 2.0 * (r0 - 1.0) * m - 10.0 / 3.0) / (m * (m - 1.0))
                - 4.0 * (m + 1.0) / (3.0 * nf)
        }
        AdjacentMode::Exact => {
            if !EXACT_ADJACENT_VALIDATED {
                return Err(Error::ModeUnavailable);
            }
            if m.fract() != 0.0 {
                return Err(out_of_range("M", m, "exact mode needs an integer support size"));
            }
            let mi = m as u64;
            let r0 = mi.next_power_of_two().trailing_zeros();
            let p = (1u64 << r0) as f64;
            let mut chi_sum = 0.0;
            for r in 0..r0 {
                let m_r = mi % (1u64 << (r + 1));
                chi_sum += chi_r(r, m_r as f64)?;
            }
            (m - 2.0) / (m - 1.0) * r0 as f64
                + 2.0 * (p - 1.0) / (m * (m - 1.0))
                + 4.0 / 3.0 * (m + 1.0) * (nf - p) / (nf * p)
                - chi_sum / (m * (m - 1.0))
        }
    };
    Ok(bracket * (1.0 - p2) / n_qubits as f64)
}
