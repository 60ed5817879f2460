use entloc::harness::{
    compare_with_theory, run_experiment_with, sweep_with, write_csv, EnsembleSpec, Observable, PartitionSpec,
    RunOptions, Source,
};
use entloc::theory::{predict_tau_localized_cue, predict_tau_mean, predict_tau_phase};

fn opts(threads: usize) -> RunOptions {
    RunOptions { threads: Some(threads) }
}

fn csv_bytes(spec: &EnsembleSpec, threads: usize) -> Vec<u8> {
    let rec = run_experiment_with(spec, opts(threads)).unwrap();
    let mut out = Vec::new();
    write_csv(&mut out, &[rec], None).unwrap();
    out
}

#[test]
fn csv_is_identical_across_thread_counts() {
    let spec = EnsembleSpec::new(Source::LocalizedCue { m: 8 }, 64, 700, 42)
        .with_observables(&[Observable::Tau, Observable::S, Observable::P2])
        .with_partitions(vec![PartitionSpec::Nu(1), PartitionSpec::Nu(2)]);
    let one = csv_bytes(&spec, 1);
    for t in [2, 3, 4] {
        assert_eq!(one, csv_bytes(&spec, t), "threads={t}");
    }
}

#[test]
fn model_runs_are_identical_across_thread_counts() {
    let spec = EnsembleSpec::new(
        Source::Spin {
            delta_ratio: 1.0,
            j_over_delta: 1.0,
        },
        64,
        100,
        5,
    )
    .shuffled(true);
    assert_eq!(csv_bytes(&spec, 1), csv_bytes(&spec, 4));
}

#[test]
fn seed_changes_the_estimate() {
    let a = EnsembleSpec::new(Source::Cue, 16, 200, 1);
    let b = EnsembleSpec::new(Source::Cue, 16, 200, 2);
    assert_ne!(csv_bytes(&a, 1), csv_bytes(&b, 1));
}

#[test]
fn stderr_shrinks_like_inverse_sqrt_samples() {
    let se = |samples| {
        let spec = EnsembleSpec::new(Source::Phase { m: 4 }, 64, samples, 9);
        run_experiment_with(&spec, opts(1)).unwrap().stats[0].stderr
    };
    let ratio = se(1600) / se(25_600);
    assert!((ratio - 4.0).abs() < 1.2, "ratio {ratio}");
}

#[test]
fn wrong_theory_is_detected() {
    let (n, m) = (256, 16);
    let spec = EnsembleSpec::new(Source::LocalizedCue { m }, n, 5000, 77);
    let rec = run_experiment_with(&spec, opts(1)).unwrap();
    let s = &rec.stats[0];
    let right = (s.mean - predict_tau_localized_cue(n, m).unwrap()) / s.stderr;
    let wrong = (s.mean - predict_tau_mean(n, 1.0 / m as f64).unwrap()) / s.stderr;
    assert!(right.abs() <= 3.0, "z={right}");
    assert!(wrong.abs() > 10.0, "z={wrong}");
}

#[test]
fn example_values() {
    assert!((predict_tau_phase(64, 8).unwrap() - 0.861111).abs() < 5e-7);
    assert!((predict_tau_localized_cue(256, 16).unwrap() - 0.878893).abs() < 5e-7);
    let spec = EnsembleSpec::new(Source::Phase { m: 8 }, 64, 10_000, 3);
    let report = compare_with_theory(&run_experiment_with(&spec, opts(1)).unwrap()).unwrap();
    assert!(report.passes(3.0), "{report}");
}

#[test]
fn sweep_over_m_matches_theory() {
    let template = EnsembleSpec::new(Source::Phase { m: 2 }, 64, 4000, 11);
    let recs = sweep_with(&template, "M", &[2.0, 4.0, 16.0], opts(1)).unwrap();
    for (rec, m) in recs.iter().zip([2, 4, 16]) {
        assert_eq!(rec.spec.source, Source::Phase { m });
        assert!(rec.stats[0].z_score().unwrap().abs() <= 4.0);
    }
    let mut out = Vec::new();
    write_csv(&mut out, &recs, Some(("M", &[2.0, 4.0, 16.0]))).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("M,source,N,M_or_l,nu,observable,mean,stderr,samples,theory,z_score,seed"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn invalid_specs_are_rejected() {
    let not_pow2 = EnsembleSpec::new(Source::Cue, 12, 10, 1);
    assert!(run_experiment_with(&not_pow2, opts(1)).is_err());
    let shuffled_cue = EnsembleSpec::new(Source::Cue, 16, 10, 1).shuffled(true);
    assert!(run_experiment_with(&shuffled_cue, opts(1)).is_err());
    let tau_half = EnsembleSpec::new(Source::Cue, 16, 10, 1).with_partitions(vec![PartitionSpec::Half]);
    assert!(run_experiment_with(&tau_half, opts(1)).is_err());
}
