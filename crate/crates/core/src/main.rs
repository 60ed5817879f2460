use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use entloc::harness::{
    compare_with_theory, run_experiment_with, sweep_with, write_csv, write_gnuplot, write_json, EnsembleSpec,
    ExperimentRecord, Observable, PartitionSpec, RunOptions, Source,
};
use entloc::models::{Gamma, SpectralWindow};
use entloc::theory::{
    chi_r, predict_cue_entropy, predict_entropy_first_order, predict_tau_adjacent, predict_tau_localized_cue,
    predict_tau_mean, predict_tau_phase, predict_tau_second_moment, AdjacentMode, EntropyVariant, MomentInputs,
};
use entloc::{Error, Result};

/// Entanglement of random and physical-model wavefunctions versus their
/// localization.
#[derive(Parser)]
#[command(name = "entloc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form prediction.
    Predict(PredictArgs),
    /// Monte Carlo over a random-vector ensemble.
    Sample(SampleArgs),
    /// Monte Carlo over eigenvectors of a physical model.
    Model(ModelArgs),
    /// Repeat a sample or model run over values of one parameter.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    Tau1,
    TauCue,
    TauPhase,
    Tau2,
    SCue,
    SFirstOrder,
    TauAdjacent,
    Chi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Consistent,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    PowerOfTwo,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, value_enum)]
    formula: Formula,
    /// Dimension N.
    #[arg(long)]
    n: Option<usize>,
    /// Support size M (real values allowed for tau-adjacent in power-of-two mode).
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    nu: Option<usize>,
    /// Mean p2 (defaults to 1/M where M is given).
    #[arg(long)]
    p2: Option<f64>,
    /// Moments `p2,p3,p4,p2_sq` for tau2 (defaults to a flat vector on M states).
    #[arg(long, value_delimiter = ',')]
    moments: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "consistent")]
    variant: Variant,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Order r of chi_r.
    #[arg(long)]
    r: Option<u32>,
    /// Argument x of chi_r.
    #[arg(long)]
    x: Option<f64>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Comma-separated bipartitions: `1`, `2`, `n/2`, or explicit subsets like `0+2`.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    partitions: Vec<String>,
    /// Comma-separated observables: tau, tau_sq, S, S_L, Q, p2, p3, p4, p2_sq.
    #[arg(long, value_delimiter = ',', default_value = "tau")]
    observables: Vec<String>,
    /// CSV output file (stdout if omitted).
    #[arg(long)]
    out: Option<String>,
    /// JSON mirror with metadata.
    #[arg(long)]
    json: Option<String>,
    /// Write a gnuplot script for the CSV (needs --out).
    #[arg(long)]
    gnuplot: Option<String>,
    /// Print z-scores against theory; exit status 1 if any |z| > 3.
    #[arg(long)]
    compare_theory: bool,
    /// Worker threads (overrides ENTLOC_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    Cue,
    LocalizedCue,
    Phase,
    ExpEnvelope,
    AdjacentPhase,
    AdjacentCue,
}

#[derive(Args, Clone)]
struct SampleArgs {
    #[arg(long, value_enum)]
    source: SourceKind,
    /// Dimension N.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
    /// Localization length of the exponential envelope.
    #[arg(long)]
    l: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Adjacent windows stop at the ends of the label range instead of wrapping.
    #[arg(long)]
    no_wrap: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Spin,
    Isrm,
    Anderson,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(value_enum)]
    kind: ModelKind,
    /// Qubit count; the dimension is 2^qubits.
    #[arg(long, conflicts_with = "sites")]
    qubits: Option<usize>,
    /// Dimension (map size or chain length).
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    delta_ratio: f64,
    #[arg(long, default_value_t = 1.5)]
    j_over_delta: f64,
    /// `p/q` or a real number.
    #[arg(long, default_value = "1/3")]
    gamma: String,
    /// Standard deviation of the on-site disorder.
    #[arg(long, default_value_t = 1.0)]
    disorder: f64,
    /// Number of disorder realizations (every eigenvector is used).
    #[arg(long, conflicts_with = "samples")]
    realizations: Option<usize>,
    /// Minimum number of eigenvectors; rounded up to whole realizations.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Randomly permute eigenvector components.
    #[arg(long)]
    shuffle: bool,
    /// `full` or `central50`.
    #[arg(long, default_value = "full")]
    window: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Spec field to vary: N, n, M, l, samples, seed, delta_ratio, j_over_delta, gamma, w.
    #[arg(long)]
    axis: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[command(subcommand)]
    target: SweepTarget,
}

#[derive(Subcommand)]
enum SweepTarget {
    Sample(SampleArgs),
    Model(ModelArgs),
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidSpec(format!("--{flag} is required here")))
}

fn predict(a: &PredictArgs) -> Result<f64> {
    let n = || need(a.n, "n");
    let m_int = || -> Result<usize> {
        let m = need(a.m, "m")?;
        if m.fract() != 0.0 || m < 0.0 {
            return Err(Error::InvalidSpec(format!("--m must be an integer here, got {m}")));
        }
        Ok(m as usize)
    };
    let p2_or_flat = || -> Result<f64> {
        match (a.p2, a.m) {
            (Some(p), _) => Ok(p),
            (None, Some(m)) => Ok(1.0 / m),
            (None, None) => need(None, "p2"),
        }
    };
    match a.formula {
        Formula::Tau1 => predict_tau_mean(n()?, need(a.p2, "p2")?),
        Formula::TauCue => predict_tau_localized_cue(n()?, m_int()?),
        Formula::TauPhase => predict_tau_phase(n()?, m_int()?),
        Formula::Tau2 => {
            let n = n()?;
            let moments = match &a.moments {
                Some(v) if v.len() == 4 => MomentInputs::new(v[0], v[1], v[2], v[3])?,
                Some(_) => return Err(Error::InvalidSpec("--moments takes p2,p3,p4,p2_sq".into())),
                None => MomentInputs::flat(a.m.map_or(Ok(n), |_| m_int())?),
            };
            predict_tau_second_moment(n, &moments)
        }
        Formula::SCue => predict_cue_entropy(n()?),
        Formula::SFirstOrder => {
            let variant = match a.variant {
                Variant::Consistent => EntropyVariant::Consistent,
                Variant::Literal => EntropyVariant::Literal,
            };
            predict_entropy_first_order(n()?, need(a.nu, "nu")?, need(a.p2, "p2")?, variant)
        }
        Formula::TauAdjacent => {
            let n = n()?;
            if !n.is_power_of_two() {
                return Err(Error::NotPowerOfTwo(n));
            }
            let mode = match a.mode {
                Mode::Exact => AdjacentMode::Exact,
                Mode::PowerOfTwo => AdjacentMode::PowerOfTwo,
            };
            predict_tau_adjacent(n.trailing_zeros() as usize, need(a.m, "m")?, p2_or_flat()?, mode)
        }
        Formula::Chi => chi_r(need(a.r, "r")?, need(a.x, "x")?),
    }
}

fn parse_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| s.parse()).collect()
}

fn finish_spec(mut spec: EnsembleSpec, out: &OutputArgs) -> Result<EnsembleSpec> {
    spec.partitions = parse_list::<PartitionSpec>(&out.partitions)?;
    spec.observables = parse_list::<Observable>(&out.observables)?;
    Ok(spec)
}

fn sample_spec(a: &SampleArgs) -> Result<EnsembleSpec> {
    let m = || need(a.m, "m");
    let wrap = !a.no_wrap;
    let source = match a.source {
        SourceKind::Cue => Source::Cue,
        SourceKind::LocalizedCue => Source::LocalizedCue { m: m()? },
        SourceKind::Phase => Source::Phase { m: m()? },
        SourceKind::ExpEnvelope => Source::ExpEnvelope { l: need(a.l, "l")? },
        SourceKind::AdjacentPhase => Source::AdjacentPhase { m: m()?, wrap },
        SourceKind::AdjacentCue => Source::AdjacentCue { m: m()?, wrap },
    };
    finish_spec(EnsembleSpec::new(source, a.n, a.samples, a.seed), &a.output)
}

fn model_spec(a: &ModelArgs) -> Result<EnsembleSpec> {
    let n = match (a.qubits, a.sites) {
        (Some(q), _) if q < usize::BITS as usize => 1usize << q,
        (Some(q), _) => return Err(Error::InvalidSpec(format!("--qubits {q} is too large"))),
        (None, Some(s)) => s,
        (None, None) => return Err(Error::InvalidSpec("--qubits or --sites is required".into())),
    };
    let window: SpectralWindow = a.window.parse()?;
    let source = match a.kind {
        ModelKind::Spin => Source::Spin {
            delta_ratio: a.delta_ratio,
            j_over_delta: a.j_over_delta,
        },
        ModelKind::Isrm => Source::Isrm {
            gamma: a.gamma.parse::<Gamma>()?,
        },
        ModelKind::Anderson => Source::Anderson { w: a.disorder, window },
    };
    if window != SpectralWindow::Full && !matches!(a.kind, ModelKind::Anderson) {
        return Err(Error::InvalidSpec("--window applies to the anderson model".into()));
    }
    let per = match window {
        SpectralWindow::Central(f) if matches!(a.kind, ModelKind::Anderson) => {
            ((n as f64 * f).round() as usize).clamp(1, n.max(1))
        }
        _ => n,
    };
    let samples = match (a.realizations, a.samples) {
        (Some(r), _) => r.saturating_mul(per),
        (None, Some(s)) => s,
        (None, None) => per,
    };
    let spec = EnsembleSpec::new(source, n, samples, a.seed).shuffled(a.shuffle);
    finish_spec(spec, &a.output)
}

fn writer(path: &Option<String>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::InvalidSpec(format!("cannot create {p}: {e}")))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Write outputs; returns whether the theory check (if requested) passed.
fn emit(records: &[ExperimentRecord], axis: Option<(&str, &[f64])>, out: &OutputArgs) -> Result<bool> {
    write_csv(writer(&out.out)?, records, axis)?;
    if let Some(path) = &out.json {
        write_json(writer(&Some(path.clone()))?, records, axis)?;
    }
    if let Some(path) = &out.gnuplot {
        let csv = out
            .out
            .as_deref()
            .ok_or_else(|| Error::InvalidSpec("--gnuplot needs --out".into()))?;
        let observables = parse_list::<Observable>(&out.observables)?;
        write_gnuplot(writer(&Some(path.clone()))?, csv, axis.map(|a| a.0), &observables)?;
    }
    let mut ok = true;
    if out.compare_theory {
        for (k, rec) in records.iter().enumerate() {
            let report = compare_with_theory(rec)?;
            if let Some((name, values)) = axis {
                eprintln!("{name} = {}", values[k]);
            }
            eprint!("{report}");
            ok &= report.passes(3.0);
        }
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Predict(a) => {
            println!("{}", predict(&a)?);
            Ok(true)
        }
        Command::Sample(a) => {
            let spec = sample_spec(&a)?;
            let rec = run_experiment_with(
                &spec,
                RunOptions {
                    threads: a.output.threads,
                },
            )?;
            emit(&[rec], None, &a.output)
        }
        Command::Model(a) => {
            let spec = model_spec(&a)?;
            let rec = run_experiment_with(
                &spec,
                RunOptions {
                    threads: a.output.threads,
                },
            )?;
            emit(&[rec], None, &a.output)
        }
        Command::Sweep(s) => {
            let first = s.values.first().copied();
            let (spec, output) = match s.target {
                SweepTarget::Sample(mut a) => {
                    // the swept field needs no template value
                    match s.axis.as_str() {
                        "M" | "m" if a.m.is_none() => a.m = first.map(|v| v as usize),
                        "l" if a.l.is_none() => a.l = first,
                        _ => {}
                    }
                    (sample_spec(&a)?, a.output)
                }
                SweepTarget::Model(a) => (model_spec(&a)?, a.output),
            };
            let records = sweep_with(
                &spec,
                &s.axis,
                &s.values,
                RunOptions {
                    threads: output.threads,
                },
            )?;
            emit(&records, Some((&s.axis, &s.values)), &output)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("theory check failed: |z| > 3");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
