//! CSV/JSON writers, the gnuplot companion script, and theory comparison.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use super::{ExperimentRecord, Observable};
use crate::error::{Error, Result};

const COLUMNS: [&str; 11] = [
    "source",
    "N",
    "M_or_l",
    "nu",
    "observable",
    "mean",
    "stderr",
    "samples",
    "theory",
    "z_score",
    "seed",
];

fn io_err(e: impl fmt::Display) -> Error {
    Error::InvalidSpec(format!("output: {e}"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write records as CSV. With `axis = Some((name, values))` the first
/// column holds `values[k]` for `records[k]`.
pub fn write_csv<W: Write>(out: W, records: &[ExperimentRecord], axis: Option<(&str, &[f64])>) -> Result<()> {
    if let Some((_, values)) = axis {
        if values.len() != records.len() {
            return Err(Error::DimensionMismatch {
                expected: records.len(),
                actual: values.len(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = Vec::with_capacity(COLUMNS.len() + 1);
    if let Some((name, _)) = axis {
        header.push(name);
    }
    header.extend(COLUMNS);
    w.write_record(&header).map_err(io_err)?;
    for (k, rec) in records.iter().enumerate() {
        for s in &rec.stats {
            let mut row = Vec::with_capacity(header.len());
            if let Some((_, values)) = axis {
                row.push(values[k].to_string());
            }
            row.extend([
                rec.spec.source.name().to_string(),
                rec.spec.n.to_string(),
                rec.spec.source.size_label(),
                s.partition.clone(),
                s.observable.name().to_string(),
                s.mean.to_string(),
                s.stderr.to_string(),
                s.samples.to_string(),
                opt(s.theory),
                opt(s.z_score()),
                rec.spec.seed.to_string(),
            ]);
            w.write_record(&row).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

#[derive(Serialize)]
struct JsonEntry<'a> {
    axis_value: Option<f64>,
    #[serde(flatten)]
    record: &'a ExperimentRecord,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    axis: Option<&'a str>,
    records: Vec<JsonEntry<'a>>,
}

/// JSON mirror of [`write_csv`], including the spec echo and run metadata.
pub fn write_json<W: Write>(out: W, records: &[ExperimentRecord], axis: Option<(&str, &[f64])>) -> Result<()> {
    let doc = JsonDoc {
        axis: axis.map(|a| a.0),
        records: records
            .iter()
            .enumerate()
            .map(|(k, record)| JsonEntry {
                axis_value: axis.and_then(|a| a.1.get(k).copied()),
                record,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(out, &doc).map_err(io_err)
}

/// A gnuplot script that plots `mean +- stderr` (and `theory`) from the CSV
/// at `csv_path` against the sweep axis, or against `N` without one.
pub fn write_gnuplot<W: Write>(
    mut out: W,
    csv_path: &str,
    axis: Option<&str>,
    observables: &[Observable],
) -> Result<()> {
    let shift = usize::from(axis.is_some());
    let x = if axis.is_some() { 1 } else { 2 };
    let col = |name: &str| shift + 1 + COLUMNS.iter().position(|c| *c == name).expect("known column");
    let (obs_col, mean, err, theory) = (col("observable"), col("mean"), col("stderr"), col("theory"));
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\nset key outside\n");
    s.push_str(&format!("set xlabel '{}'\n", axis.unwrap_or("N")));
    s.push_str("set ylabel 'mean'\n");
    s.push_str(&format!("file = '{}'\n", csv_path.replace('\'', "''")));
    let mut plots = Vec::new();
    for obs in observables {
        let name = obs.name();
        let sel = format!("(strcol({obs_col}) eq '{name}' ? $COL : NaN)");
        let pick = |c: usize| sel.replace("COL", &c.to_string());
        plots.push(format!(
            "file using {x}:{}:{} with yerrorbars title '{name}'",
            pick(mean),
            pick(err)
        ));
        plots.push(format!(
            "file using {x}:{} with lines title '{name} theory'",
            pick(theory)
        ));
    }
    if plots.is_empty() {
        return Err(Error::InvalidSpec("nothing to plot".into()));
    }
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    out.write_all(s.as_bytes()).map_err(io_err)
}

/// One row of a theory comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryComparison {
    pub observable: Observable,
    pub partition: String,
    pub mean: f64,
    pub stderr: f64,
    pub theory: f64,
    pub z_score: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub rows: Vec<TheoryComparison>,
    /// Observables without a closed form.
    pub skipped: Vec<String>,
}

impl TheoryReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.z_score.abs()))
    }

    /// Every row within `|z| <= z_max`.
    pub fn passes(&self, z_max: f64) -> bool {
        self.max_abs_z() <= z_max
    }
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:<6} {:>14} {:>12} {:>14} {:>9} {:>10}",
            "obs", "nu", "mean", "stderr", "theory", "z", "rel"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:<6} {:>14.8} {:>12.3e} {:>14.8} {:>9.3} {:>10.3e}",
                r.observable.name(),
                r.partition,
                r.mean,
                r.stderr,
                r.theory,
                r.z_score,
                r.relative_deviation
            )?;
        }
        for s in &self.skipped {
            writeln!(f, "{s}: no theory")?;
        }
        Ok(())
    }
}

/// z-scores and relative deviations for every observable that has a
/// theory value.
pub fn compare_with_theory(record: &ExperimentRecord) -> Result<TheoryReport> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for s in &record.stats {
        match (s.theory, s.z_score(), s.relative_deviation()) {
            (Some(theory), Some(z_score), Some(relative_deviation)) => rows.push(TheoryComparison {
                observable: s.observable,
                partition: s.partition.clone(),
                mean: s.mean,
                stderr: s.stderr,
                theory,
                z_score,
                relative_deviation,
            }),
            _ => skipped.push(if s.partition.is_empty() {
                s.observable.name().to_string()
            } else {
                format!("{}[{}]", s.observable.name(), s.partition)
            }),
        }
    }
    if rows.is_empty() {
        return Err(Error::NoTheoryAvailable);
    }
    Ok(TheoryReport { rows, skipped })
}
