//! Python bindings: states, entanglement measures, closed-form predictions,
//! model eigenvectors and the ensemble runner.

use entloc::entanglement::{self as ent, Bipartition};
use entloc::harness::{self, EnsembleSpec, ExperimentRecord, Observable, PartitionSpec, RunOptions, Source};
use entloc::localization;
use entloc::models::{self, AndersonParams, Gamma, IsrmParams, SpectralWindow, SpinModelParams};
use entloc::rng::{stream_rng, streams};
use entloc::states::{self, SupportSpec};
use entloc::theory::{self, AdjacentMode, EntropyVariant, MomentInputs};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: entloc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = entloc::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// A normalized pure state.
#[pyclass(name = "PureState", module = "entloc", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPureState {
    inner: states::PureState,
}

impl PyPureState {
    fn wrap(r: entloc::Result<states::PureState>) -> PyResult<Self> {
        r.map(|inner| Self { inner }).map_err(err)
    }
}

#[pymethods]
impl PyPureState {
    /// Normalizes `amplitudes` unless `normalize=False`.
    #[new]
    #[pyo3(signature = (amplitudes, normalize = true))]
    fn new(amplitudes: Vec<Complex64>, normalize: bool) -> PyResult<Self> {
        Self::wrap(if normalize {
            states::PureState::normalized(amplitudes)
        } else {
            states::PureState::new(amplitudes)
        })
    }

    #[staticmethod]
    fn basis(dim: usize, index: usize) -> PyResult<Self> {
        Self::wrap(states::PureState::basis(dim, index))
    }

    #[staticmethod]
    fn ghz(n_qubits: usize) -> PyResult<Self> {
        Self::wrap(states::PureState::ghz(n_qubits))
    }

    #[staticmethod]
    fn w(n_qubits: usize) -> PyResult<Self> {
        Self::wrap(states::PureState::w(n_qubits))
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed = 1, index = 0))]
    fn cue(n: usize, seed: u64, index: u64) -> PyResult<Self> {
        Self::wrap(states::cue_state(n, &mut stream_rng(seed, streams::STATE, index)))
    }

    /// CUE amplitudes on `m` random basis states.
    #[staticmethod]
    #[pyo3(signature = (n, m, seed = 1, index = 0))]
    fn localized_cue(n: usize, m: usize, seed: u64, index: u64) -> PyResult<Self> {
        let mut rng = stream_rng(seed, streams::STATE, index);
        Self::wrap(states::localized_cue_state(n, &SupportSpec::random_subset(m), &mut rng))
    }

    /// Equal moduli, random phases on `m` random (or adjacent) basis states.
    #[staticmethod]
    #[pyo3(signature = (n, m, seed = 1, index = 0, adjacent = false))]
    fn phase(n: usize, m: usize, seed: u64, index: u64, adjacent: bool) -> PyResult<Self> {
        let support = if adjacent {
            SupportSpec::adjacent(m)
        } else {
            SupportSpec::random_subset(m)
        };
        Self::wrap(states::phase_state(
            n,
            &support,
            &mut stream_rng(seed, streams::STATE, index),
        ))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n_qubits(&self) -> Option<usize> {
        self.inner.n_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    fn probabilities(&self) -> Vec<f64> {
        self.inner.probabilities().collect()
    }

    /// `[p_2, ..., p_{q_max}]`.
    #[pyo3(signature = (q_max = 4))]
    fn moments(&self, q_max: usize) -> PyResult<Vec<f64>> {
        localization::moments(&self.inner, q_max)
            .map(|m| m.as_slice().to_vec())
            .map_err(err)
    }

    fn ipr(&self) -> PyResult<f64> {
        localization::moments(&self.inner, 2).map(|m| m.xi).map_err(err)
    }

    fn tangle(&self, qubit: usize) -> PyResult<f64> {
        ent::tangle(&self.inner, qubit).map_err(err)
    }

    fn tangles(&self) -> PyResult<Vec<f64>> {
        ent::all_tangles(&self.inner).map_err(err)
    }

    fn meyer_wallach(&self) -> PyResult<f64> {
        ent::meyer_wallach(&self.inner).map_err(err)
    }

    /// Von Neumann entropy (bits) of the reduced state on `subset`.
    fn entropy(&self, subset: Vec<usize>) -> PyResult<f64> {
        let part = Bipartition::new(self.inner.require_qubits().map_err(err)?, &subset).map_err(err)?;
        ent::bipartite_entropy(&self.inner, &part).map_err(err)
    }

    /// Reduced density matrix on `subset` as nested lists.
    fn reduced_density_matrix(&self, subset: Vec<usize>) -> PyResult<Vec<Vec<Complex64>>> {
        let part = Bipartition::new(self.inner.require_qubits().map_err(err)?, &subset).map_err(err)?;
        let rho = ent::partial_trace(&self.inner, &part).map_err(err)?;
        let d = rho.dim();
        Ok((0..d).map(|i| (0..d).map(|j| rho.matrix()[(i, j)]).collect()).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("PureState(dim={})", self.inner.dim())
    }
}

#[pyfunction]
fn entropy_from_tangle(tau: f64) -> PyResult<f64> {
    ent::entropy_from_tangle(tau).map_err(err)
}

#[pyfunction]
fn tangle_expansion(tau: f64, order: usize) -> PyResult<f64> {
    ent::tangle_expansion(tau, order).map_err(err)
}

#[pyfunction]
fn predict_tau_mean(n: usize, p2: f64) -> PyResult<f64> {
    theory::predict_tau_mean(n, p2).map_err(err)
}

#[pyfunction]
fn predict_tau_localized_cue(n: usize, m: usize) -> PyResult<f64> {
    theory::predict_tau_localized_cue(n, m).map_err(err)
}

#[pyfunction]
fn predict_tau_phase(n: usize, m: usize) -> PyResult<f64> {
    theory::predict_tau_phase(n, m).map_err(err)
}

/// `<tau^2>` from ensemble moments, or the Haar / flat-phase moments when
/// `kind` is `"haar"` / `"flat"` with `m` the support size.
#[pyfunction]
#[pyo3(signature = (n, p2 = None, p3 = None, p4 = None, p2_sq = None, kind = None, m = None))]
#[allow(clippy::too_many_arguments)]
fn predict_tau_second_moment(
    n: usize,
    p2: Option<f64>,
    p3: Option<f64>,
    p4: Option<f64>,
    p2_sq: Option<f64>,
    kind: Option<&str>,
    m: Option<usize>,
) -> PyResult<f64> {
    let moments = match (kind, p2, p3, p4, p2_sq) {
        (Some("haar"), ..) => MomentInputs::haar(m.unwrap_or(n)),
        (Some("flat"), ..) => MomentInputs::flat(m.unwrap_or(n)),
        (None, Some(a), Some(b), Some(c), Some(d)) => MomentInputs::new(a, b, c, d).map_err(err)?,
        _ => return Err(PyValueError::new_err("give p2, p3, p4, p2_sq or kind='haar'|'flat'")),
    };
    theory::predict_tau_second_moment(n, &moments).map_err(err)
}

#[pyfunction]
fn predict_cue_entropy(n: usize) -> PyResult<f64> {
    theory::predict_cue_entropy(n).map_err(err)
}

#[pyfunction]
fn predict_linear_entropy(n: usize, nu: usize, p2: f64) -> PyResult<f64> {
    theory::predict_linear_entropy(n, nu, p2).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, nu, p2, variant = "consistent"))]
fn predict_entropy_first_order(n: usize, nu: usize, p2: f64, variant: &str) -> PyResult<f64> {
    let v = match variant {
        "consistent" => EntropyVariant::Consistent,
        "literal" => EntropyVariant::Literal,
        _ => return Err(PyValueError::new_err("variant must be 'consistent' or 'literal'")),
    };
    theory::predict_entropy_first_order(n, nu, p2, v).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n_qubits, m, p2, mode = "exact"))]
fn predict_tau_adjacent(n_qubits: usize, m: f64, p2: f64, mode: &str) -> PyResult<f64> {
    let mode = match mode {
        "exact" => AdjacentMode::Exact,
        "power_of_two" | "pow2" => AdjacentMode::PowerOfTwo,
        _ => return Err(PyValueError::new_err("mode must be 'exact' or 'power_of_two'")),
    };
    theory::predict_tau_adjacent(n_qubits, m, p2, mode).map_err(err)
}

#[pyfunction]
fn chi_r(r: u32, x: f64) -> PyResult<f64> {
    theory::chi_r(r, x).map_err(err)
}

/// Fit `<p_q> ~ N^{-D_q (q-1)}`; returns `(D_q, intercept, residual)`.
#[pyfunction]
#[pyo3(signature = (points, q = 2))]
fn multifractal_fit(points: Vec<(f64, f64)>, q: usize) -> PyResult<(f64, f64, f64)> {
    let f = localization::multifractal_fit(&points, q).map_err(err)?;
    Ok((f.exponent, f.intercept, f.residual))
}

type Spectrum = (Vec<f64>, Vec<PyPureState>);

fn wrap_states(s: Vec<states::PureState>) -> Vec<PyPureState> {
    s.into_iter().map(|inner| PyPureState { inner }).collect()
}

#[pyfunction]
#[pyo3(signature = (n_qubits, delta_ratio = 1.0, j_over_delta = 1.5, seed = 1, realization = 0))]
fn spin_eigvectors(
    n_qubits: usize,
    delta_ratio: f64,
    j_over_delta: f64,
    seed: u64,
    realization: u64,
) -> PyResult<Spectrum> {
    let p = SpinModelParams::from_ratios(n_qubits, delta_ratio, j_over_delta, seed);
    let s = models::spin_eigvectors(&p, realization).map_err(err)?;
    Ok((s.eigenvalues, wrap_states(s.states)))
}

/// Eigenphases and eigenvectors of one ISRM realization; `gamma` is `"p/q"`
/// or a decimal.
#[pyfunction]
#[pyo3(signature = (n, gamma = "1/3", seed = 1, realization = 0))]
fn isrm_eigvectors(n: usize, gamma: &str, seed: u64, realization: u64) -> PyResult<Spectrum> {
    let p = IsrmParams {
        n,
        gamma: parse::<Gamma>(gamma)?,
        seed,
    };
    let s = models::isrm_eigvectors(&p, realization).map_err(err)?;
    Ok((s.eigenvalues.iter().map(|z| z.arg()).collect(), wrap_states(s.states)))
}

#[pyfunction]
#[pyo3(signature = (n_sites, w = 1.0, seed = 1, realization = 0, window = "full"))]
fn anderson_eigvectors(n_sites: usize, w: f64, seed: u64, realization: u64, window: &str) -> PyResult<Spectrum> {
    let p = AndersonParams { n_sites, w, seed };
    let s = models::anderson_eigvectors(&p, realization, parse::<SpectralWindow>(window)?).map_err(err)?;
    Ok((s.eigenvalues, wrap_states(s.states)))
}

fn source_from_args(
    kind: &str,
    m: Option<usize>,
    l: Option<f64>,
    wrap: bool,
    params: Option<&Bound<'_, PyDict>>,
) -> PyResult<Source> {
    let need_m = || m.ok_or_else(|| PyValueError::new_err(format!("source '{kind}' needs m")));
    let get = |key: &str, default: f64| -> PyResult<f64> {
        match params.map(|p| p.get_item(key)).transpose()?.flatten() {
            Some(v) => v.extract(),
            None => Ok(default),
        }
    };
    Ok(match kind {
        "cue" => Source::Cue,
        "localized_cue" => Source::LocalizedCue { m: need_m()? },
        "phase" => Source::Phase { m: need_m()? },
        "adjacent_phase" => Source::AdjacentPhase { m: need_m()?, wrap },
        "adjacent_cue" => Source::AdjacentCue { m: need_m()?, wrap },
        "exp_envelope" => Source::ExpEnvelope {
            l: l.ok_or_else(|| PyValueError::new_err("source 'exp_envelope' needs l"))?,
        },
        "spin" => Source::Spin {
            delta_ratio: get("delta_ratio", 1.0)?,
            j_over_delta: get("j_over_delta", 1.5)?,
        },
        "isrm" => {
            let gamma = match params.map(|p| p.get_item("gamma")).transpose()?.flatten() {
                Some(v) => match v.extract::<f64>() {
                    Ok(x) => Gamma::Real(x),
                    Err(_) => parse::<Gamma>(&v.extract::<String>()?)?,
                },
                None => Gamma::Rational { p: 1, q: 3 },
            };
            Source::Isrm { gamma }
        }
        "anderson" => Source::Anderson {
            w: get("w", 1.0)?,
            window: SpectralWindow::Full,
        },
        _ => return Err(PyValueError::new_err(format!("unknown source '{kind}'"))),
    })
}

fn record_to_py<'py>(py: Python<'py>, rec: &ExperimentRecord) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rec.stats
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("observable", s.observable.name())?;
            d.set_item("partition", &s.partition)?;
            d.set_item("mean", s.mean)?;
            d.set_item("stderr", s.stderr)?;
            d.set_item("samples", s.samples)?;
            d.set_item("theory", s.theory)?;
            d.set_item("z_score", s.z_score())?;
            Ok(d)
        })
        .collect()
}

/// Sample an ensemble and return one dict per (observable, partition).
///
/// `source` is one of cue, localized_cue, phase, adjacent_phase,
/// adjacent_cue, exp_envelope, spin, isrm, anderson. Model parameters go in
/// `params` (delta_ratio, j_over_delta, gamma, w).
#[pyfunction]
#[pyo3(signature = (
    source, n, samples, seed = 1, m = None, l = None, wrap = true,
    observables = vec!["tau".to_string()], partitions = vec!["1".to_string()],
    shuffle = false, params = None, threads = None,
))]
#[allow(clippy::too_many_arguments)]
fn run_ensemble<'py>(
    py: Python<'py>,
    source: &str,
    n: usize,
    samples: usize,
    seed: u64,
    m: Option<usize>,
    l: Option<f64>,
    wrap: bool,
    observables: Vec<String>,
    partitions: Vec<String>,
    shuffle: bool,
    params: Option<&Bound<'py, PyDict>>,
    threads: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let src = source_from_args(source, m, l, wrap, params)?;
    let obs = observables
        .iter()
        .map(|o| parse::<Observable>(o))
        .collect::<PyResult<Vec<_>>>()?;
    let parts = partitions
        .iter()
        .map(|p| parse::<PartitionSpec>(p))
        .collect::<PyResult<Vec<_>>>()?;
    let spec = EnsembleSpec::new(src, n, samples, seed)
        .with_observables(&obs)
        .with_partitions(parts)
        .shuffled(shuffle);
    let rec = py
        .detach(|| harness::run_experiment_with(&spec, RunOptions { threads }))
        .map_err(err)?;
    record_to_py(py, &rec)
}

#[pymodule]
#[pyo3(name = "entloc")]
pub fn entloc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("EXACT_ADJACENT_VALIDATED", theory::EXACT_ADJACENT_VALIDATED)?;
    m.add_class::<PyPureState>()?;
    m.add_function(wrap_pyfunction!(entropy_from_tangle, m)?)?;
    m.add_function(wrap_pyfunction!(tangle_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(predict_tau_mean, m)?)?;
    m.add_function(wrap_pyfunction!(predict_tau_localized_cue, m)?)?;
    m.add_function(wrap_pyfunction!(predict_tau_phase, m)?)?;
    m.add_function(wrap_pyfunction!(predict_tau_second_moment, m)?)?;
    m.add_function(wrap_pyfunction!(predict_cue_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(predict_linear_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(predict_entropy_first_order, m)?)?;
    m.add_function(wrap_pyfunction!(predict_tau_adjacent, m)?)?;
    m.add_function(wrap_pyfunction!(chi_r, m)?)?;
    m.add_function(wrap_pyfunction!(multifractal_fit, m)?)?;
    m.add_function(wrap_pyfunction!(spin_eigvectors, m)?)?;
    m.add_function(wrap_pyfunction!(isrm_eigvectors, m)?)?;
    m.add_function(wrap_pyfunction!(anderson_eigvectors, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    Ok(())
}
