//! Monte Carlo runner: draws states from an ensemble, evaluates observables,
//! and averages them with error bars next to the matching closed-form value.
//!
//! Sample `i` of an i.i.d. source uses the random stream `(seed, i)`, and a
//! model source uses one stream per disorder realization, so a record does
//! not depend on how many worker threads produced it.

mod output;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::entanglement::{
    all_tangles, entropy_from_tangle, linear_entropy, partial_trace, tangle, von_neumann_entropy, Bipartition,
};
use crate::error::{Error, Result};
use crate::localization::moments;
use crate::models::{
    anderson_eigvectors, isrm_eigvectors, spin_eigvectors, AndersonParams, Gamma, IsrmParams, ModelSpectrum,
    SpectralWindow, SpinModelParams,
};
use crate::rng::{stream_rng, streams};
use crate::states::{
    cue_state, exp_envelope_cue_state, localized_cue_state, phase_state, qubit_count, shuffle_components, PureState,
    SupportSpec,
};
use crate::sum::pairwise_sum;
use crate::theory::{
    predict_cue_entropy, predict_entropy_first_order, predict_linear_entropy, predict_tau_adjacent, predict_tau_mean,
    predict_tau_second_moment, AdjacentMode, EntropyVariant, MomentInputs, EXACT_ADJACENT_VALIDATED,
};

pub use output::{compare_with_theory, write_csv, write_gnuplot, write_json, TheoryComparison, TheoryReport};

/// Number of batches for the batch-means error estimate.
const BATCHES: usize = 32;
/// Environment variable that caps the worker count.
pub const THREADS_ENV: &str = "ENTLOC_THREADS";

/// Where the states come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// Haar-random vectors on the full space.
    Cue,
    /// CUE vectors on `m` random basis states.
    LocalizedCue {
        m: usize,
    },
    /// Equal moduli and random phases on `m` random basis states.
    Phase {
        m: usize,
    },
    /// CUE amplitudes under an `exp(-|x - x0|/l)` envelope.
    ExpEnvelope {
        l: f64,
    },
    /// Random phases on `m` consecutive basis labels.
    AdjacentPhase {
        m: usize,
        wrap: bool,
    },
    /// CUE amplitudes on `m` consecutive basis labels.
    AdjacentCue {
        m: usize,
        wrap: bool,
    },
    Spin {
        delta_ratio: f64,
        j_over_delta: f64,
    },
    Isrm {
        gamma: Gamma,
    },
    Anderson {
        w: f64,
        window: SpectralWindow,
    },
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Cue => "cue",
            Source::LocalizedCue { .. } => "localized_cue",
            Source::Phase { .. } => "phase",
            Source::ExpEnvelope { .. } => "exp_envelope",
            Source::AdjacentPhase { .. } => "adjacent_phase",
            Source::AdjacentCue { .. } => "adjacent_cue",
            Source::Spin { .. } => "model:spin",
            Source::Isrm { .. } => "model:isrm",
            Source::Anderson { .. } => "model:anderson",
        }
    }

    pub fn is_model(&self) -> bool {
        matches!(
            self,
            Source::Spin { .. } | Source::Isrm { .. } | Source::Anderson { .. }
        )
    }

    /// The `M` or `l` column.
    pub fn size_label(&self) -> String {
        match self {
            Source::LocalizedCue { m }
            | Source::Phase { m }
            | Source::AdjacentPhase { m, .. }
            | Source::AdjacentCue { m, .. } => m.to_string(),
            Source::ExpEnvelope { l } => l.to_string(),
            _ => String::new(),
        }
    }

    fn support_size(&self) -> Option<usize> {
        match self {
            Source::LocalizedCue { m }
            | Source::Phase { m }
            | Source::AdjacentPhase { m, .. }
            | Source::AdjacentCue { m, .. } => Some(*m),
            _ => None,
        }
    }
}

/// A per-state quantity that can be averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    Tau,
    TauSq,
    S,
    SL,
    Q,
    P2,
    P3,
    P4,
    P2Sq,
}

impl Observable {
    pub const ALL: [Observable; 9] = [
        Observable::Tau,
        Observable::TauSq,
        Observable::S,
        Observable::SL,
        Observable::Q,
        Observable::P2,
        Observable::P3,
        Observable::P4,
        Observable::P2Sq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Tau => "tau",
            Observable::TauSq => "tau_sq",
            Observable::S => "S",
            Observable::SL => "S_L",
            Observable::Q => "Q",
            Observable::P2 => "p2",
            Observable::P3 => "p3",
            Observable::P4 => "p4",
            Observable::P2Sq => "p2_sq",
        }
    }

    /// Whether the value depends on a bipartition.
    pub fn per_partition(self) -> bool {
        matches!(
            self,
            Observable::Tau | Observable::TauSq | Observable::S | Observable::SL
        )
    }

    fn single_qubit_only(self) -> bool {
        matches!(self, Observable::Tau | Observable::TauSq)
    }

    fn needs_qubits(self) -> bool {
        self.per_partition() || self == Observable::Q
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Observable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "tau" => Observable::Tau,
            "tau_sq" | "tau2" => Observable::TauSq,
            "S" | "s" | "entropy" => Observable::S,
            "S_L" | "s_l" | "SL" | "sl" => Observable::SL,
            "Q" | "q" => Observable::Q,
            "p2" => Observable::P2,
            "p3" => Observable::P3,
            "p4" => Observable::P4,
            "p2_sq" | "p2sq" => Observable::P2Sq,
            other => return Err(Error::InvalidSpec(format!("unknown observable '{other}'"))),
        })
    }
}

/// A requested bipartition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSpec {
    /// `nu = 1` means every single-qubit cut, averaged; larger `nu` uses
    /// the leading qubits `0..nu`.
    Nu(usize),
    /// `nu = n/2`.
    Half,
    /// Explicit qubit subset, written `0+2`.
    Subset(Vec<usize>),
}

impl PartitionSpec {
    fn resolve(&self, n_qubits: usize) -> Result<Cut> {
        match self {
            PartitionSpec::Half => PartitionSpec::Nu(n_qubits / 2).resolve(n_qubits),
            PartitionSpec::Nu(nu) => {
                if *nu == 0 || *nu >= n_qubits {
                    return Err(Error::InvalidSpec(format!("nu = {nu} needs 1 <= nu < n = {n_qubits}")));
                }
                if *nu == 1 {
                    Ok(Cut::AllSingle)
                } else {
                    Ok(Cut::Fixed(Bipartition::leading(n_qubits, *nu)?, nu.to_string()))
                }
            }
            PartitionSpec::Subset(q) => Ok(Cut::Fixed(Bipartition::new(n_qubits, q)?, self.to_string())),
        }
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSpec::Nu(nu) => write!(f, "{nu}"),
            PartitionSpec::Half => write!(f, "n/2"),
            PartitionSpec::Subset(q) => {
                let parts: Vec<String> = q.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join("+"))
            }
        }
    }
}

impl Serialize for PartitionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for PartitionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(format!("cannot parse partition '{s}'"));
        if s == "n/2" {
            return Ok(PartitionSpec::Half);
        }
        if s.contains('+') {
            let q = s
                .split('+')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return Ok(PartitionSpec::Subset(q));
        }
        s.parse().map(PartitionSpec::Nu).map_err(|_| bad())
    }
}

#[derive(Debug, Clone)]
enum Cut {
    AllSingle,
    Fixed(Bipartition, String),
}

impl Cut {
    fn label(&self) -> String {
        match self {
            Cut::AllSingle => "1".into(),
            Cut::Fixed(_, l) => l.clone(),
        }
    }

    fn single_qubit(&self) -> Option<Option<usize>> {
        match self {
            Cut::AllSingle => Some(None),
            Cut::Fixed(b, _) if b.nu() == 1 => Some(Some(b.subset()[0])),
            Cut::Fixed(..) => None,
        }
    }
}

/// Everything needed to reproduce one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub source: Source,
    /// Hilbert-space dimension `N` (for the spin model `2^n`, for the
    /// Anderson chain the number of sites).
    pub n: usize,
    pub partitions: Vec<PartitionSpec>,
    pub samples: usize,
    pub seed: u64,
    /// Permute eigenvector components at random (model sources only).
    pub shuffle: bool,
    pub observables: Vec<Observable>,
}

impl EnsembleSpec {
    pub fn new(source: Source, n: usize, samples: usize, seed: u64) -> Self {
        Self {
            source,
            n,
            partitions: vec![PartitionSpec::Nu(1)],
            samples,
            seed,
            shuffle: false,
            observables: vec![Observable::Tau],
        }
    }

    pub fn with_observables(mut self, obs: &[Observable]) -> Self {
        self.observables = obs.to_vec();
        self
    }

    pub fn with_partitions(mut self, parts: Vec<PartitionSpec>) -> Self {
        self.partitions = parts;
        self
    }

    pub fn shuffled(mut self, shuffle: bool) -> Self {
        self.shuffle = shuffle;
        self
    }

    /// Copy with the numeric field `axis` set to `value`.
    ///
    /// Axes: `N`, `n` (sets `N = 2^n`), `M`, `l`, `samples`, `seed`,
    /// `delta_ratio`, `j_over_delta`, `gamma`, `w`.
    pub fn with_axis(&self, axis: &str, value: f64) -> Result<Self> {
        let mut s = self.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidSpec(format!(
                    "axis {axis} needs a non-negative integer, got {v}"
                )))
            }
        };
        let mismatch = || Error::InvalidSpec(format!("axis {axis} does not apply to source {}", self.source.name()));
        match axis {
            "N" => s.n = as_count(value)?,
            "n" => {
                let q = as_count(value)?;
                if q >= usize::BITS as usize {
                    return Err(Error::InvalidSpec(format!("n = {q} is too large")));
                }
                s.n = 1 << q;
            }
            "samples" => s.samples = as_count(value)?,
            "seed" => s.seed = as_count(value)? as u64,
            "M" | "m" => match &mut s.source {
                Source::LocalizedCue { m }
                | Source::Phase { m }
                | Source::AdjacentPhase { m, .. }
                | Source::AdjacentCue { m, .. } => *m = as_count(value)?,
                _ => return Err(mismatch()),
            },
            "l" => match &mut s.source {
                Source::ExpEnvelope { l } => *l = value,
                _ => return Err(mismatch()),
            },
            "delta_ratio" => match &mut s.source {
                Source::Spin { delta_ratio, .. } => *delta_ratio = value,
                _ => return Err(mismatch()),
            },
            "j_over_delta" => match &mut s.source {
                Source::Spin { j_over_delta, .. } => *j_over_delta = value,
                _ => return Err(mismatch()),
            },
            "gamma" => match &mut s.source {
                Source::Isrm { gamma } => *gamma = Gamma::Real(value),
                _ => return Err(mismatch()),
            },
            "w" => match &mut s.source {
                Source::Anderson { w, .. } => *w = value,
                _ => return Err(mismatch()),
            },
            _ => return Err(Error::InvalidSpec(format!("unknown sweep axis '{axis}'"))),
        }
        Ok(s)
    }

    fn n_qubits(&self) -> Option<usize> {
        qubit_count(self.n)
    }

    /// Check the spec and resolve its bipartitions.
    fn plan(&self) -> Result<Plan> {
        if self.samples == 0 {
            return Err(Error::InvalidSpec("samples must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("dimension N = {} is too small", self.n)));
        }
        if self.observables.is_empty() {
            return Err(Error::InvalidSpec("no observables requested".into()));
        }
        if self.shuffle && !self.source.is_model() {
            return Err(Error::InvalidSpec("shuffling applies to model sources only".into()));
        }
        if let Some(m) = self.source.support_size() {
            if m == 0 || m > self.n {
                return Err(Error::SupportTooLarge { m, n: self.n });
            }
        }
        if let Source::Spin { .. } = self.source {
            if self.n_qubits().is_none() {
                return Err(Error::NotPowerOfTwo(self.n));
            }
        }
        let mut targets = Vec::new();
        let mut cuts = Vec::new();
        let needs_qubits = self.observables.iter().any(|o| o.needs_qubits());
        if needs_qubits {
            let n_qubits = self.n_qubits().ok_or(Error::NotPowerOfTwo(self.n))?;
            if n_qubits < 2 {
                return Err(Error::InvalidSpec("entanglement needs at least two qubits".into()));
            }
            let parts = if self.partitions.is_empty() {
                vec![PartitionSpec::Nu(1)]
            } else {
                self.partitions.clone()
            };
            for p in &parts {
                cuts.push(p.resolve(n_qubits)?);
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for &obs in &self.observables {
            if !seen.insert(obs) {
                continue;
            }
            if obs.per_partition() {
                let mut any = false;
                for (k, cut) in cuts.iter().enumerate() {
                    if obs.single_qubit_only() && cut.single_qubit().is_none() {
                        continue;
                    }
                    targets.push(Target { obs, cut: Some(k) });
                    any = true;
                }
                if !any {
                    return Err(Error::InvalidSpec(format!("{obs} needs a single-qubit partition")));
                }
            } else {
                targets.push(Target { obs, cut: None });
            }
        }
        Ok(Plan { cuts, targets })
    }
}

#[derive(Debug, Clone, Copy)]
struct Target {
    obs: Observable,
    cut: Option<usize>,
}

#[derive(Debug, Clone)]
struct Plan {
    cuts: Vec<Cut>,
    targets: Vec<Target>,
}

/// Moments every sample records, requested or not; model theory columns
/// are built from them.
const MOMENT_SLOTS: usize = 4;

impl Plan {
    fn width(&self) -> usize {
        MOMENT_SLOTS + self.targets.len()
    }

    /// `[p2, p3, p4, p2^2, targets...]` for one state.
    fn evaluate(&self, state: &PureState) -> Result<Vec<f64>> {
        let m = moments(state, 4)?;
        let mut row = Vec::with_capacity(self.width());
        row.extend([m.p(2), m.p(3), m.p(4), m.p(2) * m.p(2)]);
        let needs_all = self
            .targets
            .iter()
            .any(|t| t.obs == Observable::Q || t.cut.is_some_and(|k| matches!(self.cuts[k], Cut::AllSingle)));
        let tangles = if needs_all { all_tangles(state)? } else { Vec::new() };
        let mean = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
            let v = tangles.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
            Ok(v.iter().sum::<f64>() / v.len() as f64)
        };
        let mut reduced = vec![None; self.cuts.len()];
        for t in &self.targets {
            let value = match (t.obs, t.cut.map(|k| (k, &self.cuts[k]))) {
                (Observable::P2, _) => row[0],
                (Observable::P3, _) => row[1],
                (Observable::P4, _) => row[2],
                (Observable::P2Sq, _) => row[3],
                (Observable::Q, _) => mean(&|t| Ok(t))?,
                (obs, Some((_, Cut::AllSingle))) => match obs {
                    Observable::Tau | Observable::SL => mean(&|t| Ok(t))?,
                    Observable::TauSq => mean(&|t| Ok(t * t))?,
                    _ => mean(&entropy_from_tangle)?,
                },
                (obs, Some((k, Cut::Fixed(part, _)))) => {
                    if part.nu() == 1 {
                        let tau = tangle(state, part.subset()[0])?;
                        match obs {
                            Observable::Tau | Observable::SL => tau,
                            Observable::TauSq => tau * tau,
                            _ => entropy_from_tangle(tau)?,
                        }
                    } else {
                        if reduced[k].is_none() {
                            reduced[k] = Some(partial_trace(state, part)?);
                        }
                        let rho = reduced[k].as_ref().expect("just filled");
                        match obs {
                            Observable::SL => linear_entropy(rho)?,
                            _ => von_neumann_entropy(rho)?,
                        }
                    }
                }
                (_, None) => unreachable!("per-partition observable without a cut"),
            };
            row.push(value);
        }
        Ok(row)
    }
}

/// Mean, batch-means standard error and count of one observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableStats {
    pub observable: Observable,
    /// Bipartition label (`1`, `2`, `0+2`), empty for partition-free
    /// observables.
    pub partition: String,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub theory: Option<f64>,
}

impl ObservableStats {
    /// `(mean - theory)/stderr`. With a zero error bar the score is 0 for
    /// agreement to rounding and infinite otherwise.
    pub fn z_score(&self) -> Option<f64> {
        let th = self.theory?;
        let diff = self.mean - th;
        if self.stderr > 0.0 {
            Some(diff / self.stderr)
        } else if diff.abs() <= 1e-12 * th.abs().max(1.0) {
            Some(0.0)
        } else {
            Some(diff.signum() * f64::INFINITY)
        }
    }

    /// `(mean - theory)/theory`.
    pub fn relative_deviation(&self) -> Option<f64> {
        let th = self.theory?;
        Some(if th == 0.0 {
            self.mean - th
        } else {
            (self.mean - th) / th.abs()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub version: &'static str,
    /// Excluded from the CSV; differs between otherwise identical runs.
    pub wall_time_s: f64,
    pub threads: usize,
    pub samples_requested: usize,
    pub realizations: Option<usize>,
    pub eigvectors_per_realization: Option<usize>,
    pub adjacent_exact_mode: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub spec: EnsembleSpec,
    pub stats: Vec<ObservableStats>,
    pub metadata: RunMetadata,
}

impl ExperimentRecord {
    pub fn get(&self, obs: Observable, partition: &str) -> Option<&ObservableStats> {
        self.stats
            .iter()
            .find(|s| s.observable == obs && s.partition == partition)
    }

    /// The first entry for `obs` regardless of partition.
    pub fn first(&self, obs: Observable) -> Option<&ObservableStats> {
        self.stats.iter().find(|s| s.observable == obs)
    }
}

/// Worker-count options for [`run_experiment_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// `None` reads `ENTLOC_THREADS`, falling back to all cores.
    pub threads: Option<usize>,
}

fn env_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Run `spec` with the worker count from `ENTLOC_THREADS`.
pub fn run_experiment(spec: &EnsembleSpec) -> Result<ExperimentRecord> {
    run_experiment_with(spec, RunOptions::default())
}

pub fn run_experiment_with(spec: &EnsembleSpec, opts: RunOptions) -> Result<ExperimentRecord> {
    let plan = spec.plan()?;
    match opts.threads.or_else(env_threads) {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
            pool.install(|| execute(spec, &plan, t))
        }
        None => execute(spec, &plan, rayon::current_num_threads()),
    }
}

fn with_index<T>(index: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Sample {
        index,
        source: Box::new(e),
    })
}

fn draw_state(spec: &EnsembleSpec, index: usize) -> Result<PureState> {
    let mut rng = stream_rng(spec.seed, streams::STATE, index as u64);
    let n = spec.n;
    match &spec.source {
        Source::Cue => cue_state(n, &mut rng),
        Source::LocalizedCue { m } => localized_cue_state(n, &SupportSpec::random_subset(*m), &mut rng),
        Source::Phase { m } => phase_state(n, &SupportSpec::random_subset(*m), &mut rng),
        Source::ExpEnvelope { l } => exp_envelope_cue_state(n, *l, &mut rng),
        Source::AdjacentPhase { m, wrap } => phase_state(n, &adjacent(*m, *wrap), &mut rng),
        Source::AdjacentCue { m, wrap } => localized_cue_state(n, &adjacent(*m, *wrap), &mut rng),
        _ => unreachable!("model sources are drawn by realization"),
    }
}

fn adjacent(m: usize, wrap: bool) -> SupportSpec {
    if wrap {
        SupportSpec::adjacent(m)
    } else {
        SupportSpec::adjacent_no_wrap(m)
    }
}

fn model_spectrum(spec: &EnsembleSpec, realization: u64) -> Result<ModelSpectrum<()>> {
    let strip = |states: Vec<PureState>| ModelSpectrum {
        eigenvalues: vec![(); states.len()],
        states,
    };
    match &spec.source {
        Source::Spin {
            delta_ratio,
            j_over_delta,
        } => {
            let q = spec.n_qubits().ok_or(Error::NotPowerOfTwo(spec.n))?;
            let p = SpinModelParams::from_ratios(q, *delta_ratio, *j_over_delta, spec.seed);
            Ok(strip(spin_eigvectors(&p, realization)?.states))
        }
        Source::Isrm { gamma } => {
            let p = IsrmParams {
                n: spec.n,
                gamma: *gamma,
                seed: spec.seed,
            };
            Ok(strip(isrm_eigvectors(&p, realization)?.states))
        }
        Source::Anderson { w, window } => {
            let p = AndersonParams {
                n_sites: spec.n,
                w: *w,
                seed: spec.seed,
            };
            Ok(strip(anderson_eigvectors(&p, realization, *window)?.states))
        }
        _ => unreachable!("not a model source"),
    }
}

fn eigvectors_per_realization(spec: &EnsembleSpec) -> usize {
    match &spec.source {
        Source::Anderson {
            window: SpectralWindow::Central(f),
            ..
        } => ((spec.n as f64 * f).round() as usize).clamp(1, spec.n),
        _ => spec.n,
    }
}

fn execute(spec: &EnsembleSpec, plan: &Plan, threads: usize) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let (rows, realizations, per) = if spec.source.is_model() {
        let per = eigvectors_per_realization(spec);
        let realizations = spec.samples.div_ceil(per);
        let blocks = (0..realizations)
            .into_par_iter()
            .map(|r| -> Result<Vec<Vec<f64>>> {
                let spectrum = with_index(r * per, model_spectrum(spec, r as u64))?;
                spectrum
                    .states
                    .par_iter()
                    .enumerate()
                    .map(|(k, state)| {
                        let index = r * per + k;
                        let row = if spec.shuffle {
                            let mut rng = stream_rng(spec.seed, streams::SHUFFLE, index as u64);
                            plan.evaluate(&shuffle_components(state, &mut rng))
                        } else {
                            plan.evaluate(state)
                        };
                        with_index(index, row)
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        (
            blocks.into_iter().flatten().collect::<Vec<_>>(),
            Some(realizations),
            Some(per),
        )
    } else {
        let rows = (0..spec.samples)
            .into_par_iter()
            .map(|i| with_index(i, draw_state(spec, i).and_then(|s| plan.evaluate(&s))))
            .collect::<Result<Vec<_>>>()?;
        (rows, None, None)
    };

    let column = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
    let moment_means: Vec<f64> = (0..MOMENT_SLOTS).map(|c| summarize(&column(c)).0).collect();
    let measured = MomentInputs {
        mean_p2: moment_means[0],
        mean_p3: moment_means[1],
        mean_p4: moment_means[2],
        mean_p2_sq: moment_means[3],
    };
    let stats = plan
        .targets
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let (mean, stderr) = summarize(&column(MOMENT_SLOTS + k));
            let cut = t.cut.map(|c| &plan.cuts[c]);
            ObservableStats {
                observable: t.obs,
                partition: cut.map(Cut::label).unwrap_or_default(),
                mean,
                stderr,
                samples: rows.len(),
                theory: theory_for(spec, t.obs, cut, &measured),
            }
        })
        .collect();
    Ok(ExperimentRecord {
        spec: spec.clone(),
        stats,
        metadata: RunMetadata {
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: start.elapsed().as_secs_f64(),
            threads,
            samples_requested: spec.samples,
            realizations,
            eigvectors_per_realization: per,
            adjacent_exact_mode: EXACT_ADJACENT_VALIDATED,
        },
    })
}

/// Mean (pairwise summation) and batch-means standard error over
/// `min(32, len)` contiguous batches.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let b = BATCHES.min(n);
    let batch_means: Vec<f64> = (0..b)
        .map(|k| {
            let chunk = &values[k * n / b..(k + 1) * n / b];
            pairwise_sum(chunk) / chunk.len() as f64
        })
        .collect();
    let center = pairwise_sum(&batch_means) / b as f64;
    let dev: Vec<f64> = batch_means.iter().map(|m| (m - center).powi(2)).collect();
    let var = pairwise_sum(&dev) / (b as f64 * (b as f64 - 1.0));
    (mean, var.sqrt())
}

/// Closed-form moments of the ensemble, if the source has them.
fn ensemble_moments(spec: &EnsembleSpec, measured: &MomentInputs) -> Option<MomentInputs> {
    match &spec.source {
        Source::Cue => Some(MomentInputs::haar(spec.n)),
        Source::LocalizedCue { m } | Source::AdjacentCue { m, .. } => Some(MomentInputs::haar(*m)),
        Source::Phase { m } | Source::AdjacentPhase { m, .. } => Some(MomentInputs::flat(*m)),
        Source::ExpEnvelope { .. } => None,
        _ => MomentInputs::new(
            measured.mean_p2,
            measured.mean_p3,
            measured.mean_p4,
            measured.mean_p2_sq,
        )
        .ok(),
    }
}

/// Whether the ensemble is invariant under permutations of basis labels,
/// which the moment formulas assume.
fn permutation_invariant(spec: &EnsembleSpec) -> bool {
    match spec.source {
        Source::Cue | Source::LocalizedCue { .. } | Source::Phase { .. } => true,
        Source::Spin { .. } | Source::Isrm { .. } | Source::Anderson { .. } => spec.shuffle,
        _ => false,
    }
}

fn adjacent_tau(spec: &EnsembleSpec, m: f64, p2: f64) -> Option<f64> {
    let q = spec.n_qubits()?;
    let mode = if EXACT_ADJACENT_VALIDATED && m.fract() == 0.0 {
        AdjacentMode::Exact
    } else {
        AdjacentMode::PowerOfTwo
    };
    predict_tau_adjacent(q, m, p2, mode).ok()
}

fn theory_for(spec: &EnsembleSpec, obs: Observable, cut: Option<&Cut>, measured: &MomentInputs) -> Option<f64> {
    let n = spec.n;
    let moments = ensemble_moments(spec, measured);
    let invariant = permutation_invariant(spec);
    let all_single = matches!(cut, Some(Cut::AllSingle)) || obs == Observable::Q;
    match obs {
        Observable::P2 | Observable::P3 | Observable::P4 | Observable::P2Sq => {
            if spec.source.is_model() {
                return None;
            }
            let m = moments?;
            Some(match obs {
                Observable::P2 => m.mean_p2,
                Observable::P3 => m.mean_p3,
                Observable::P4 => m.mean_p4,
                _ => m.mean_p2_sq,
            })
        }
        Observable::Tau | Observable::Q | Observable::SL => {
            let nu = match cut {
                Some(Cut::Fixed(b, _)) => b.nu(),
                _ => 1,
            };
            if invariant {
                let p2 = moments?.mean_p2;
                return if nu == 1 {
                    predict_tau_mean(n, p2).ok()
                } else {
                    predict_linear_entropy(n, nu, p2).ok()
                };
            }
            if !all_single || (obs == Observable::SL && nu != 1) {
                return None;
            }
            match &spec.source {
                Source::AdjacentPhase { m, wrap: true } => adjacent_tau(spec, *m as f64, 1.0 / *m as f64),
                Source::AdjacentCue { m, wrap: true } => adjacent_tau(spec, *m as f64, 2.0 / (*m as f64 + 1.0)),
                Source::ExpEnvelope { l } => {
                    let q = spec.n_qubits()?;
                    predict_tau_adjacent(q, 2.0 * l, measured.mean_p2, AdjacentMode::PowerOfTwo).ok()
                }
                Source::Anderson { .. } => {
                    let xi = 1.0 / measured.mean_p2;
                    let q = spec.n_qubits()?;
                    predict_tau_adjacent(q, 2.0 * xi, measured.mean_p2, AdjacentMode::PowerOfTwo).ok()
                }
                Source::Spin { .. } | Source::Isrm { .. } => predict_tau_mean(n, measured.mean_p2).ok(),
                _ => None,
            }
        }
        Observable::TauSq => {
            if !invariant {
                return None;
            }
            predict_tau_second_moment(n, &moments?).ok()
        }
        Observable::S => {
            if spec.source != Source::Cue {
                return None;
            }
            match cut? {
                Cut::AllSingle => predict_cue_entropy(n).ok(),
                Cut::Fixed(b, _) if b.nu() == 1 => predict_cue_entropy(n).ok(),
                Cut::Fixed(b, _) => {
                    predict_entropy_first_order(n, b.nu(), 2.0 / (n as f64 + 1.0), EntropyVariant::Consistent).ok()
                }
            }
        }
    }
}

/// One record per value of `axis`.
pub fn sweep(template: &EnsembleSpec, axis: &str, values: &[f64]) -> Result<Vec<ExperimentRecord>> {
    sweep_with(template, axis, values, RunOptions::default())
}

pub fn sweep_with(
    template: &EnsembleSpec,
    axis: &str,
    values: &[f64],
    opts: RunOptions,
) -> Result<Vec<ExperimentRecord>> {
    if values.is_empty() {
        return Err(Error::InvalidSpec("sweep needs at least one value".into()));
    }
    let specs = values
        .iter()
        .map(|&v| template.with_axis(axis, v))
        .collect::<Result<Vec<_>>>()?;
    specs.iter().map(|s| run_experiment_with(s, opts)).collect()
}
