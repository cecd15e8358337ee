//! Aggregated benchmark reports.

use std::io::{self, Write};

use super::{MetricSnapshot, PrequentialResult};

pub const LIBRARY_TAG: &str = "streamlearn";

pub const REPORT_COLUMNS: [&str; 9] = [
    "library-tag",
    "learner",
    "ensemble_size",
    "threads",
    "minibatch",
    "wallclock_s_mean",
    "wallclock_s_std",
    "accuracy_mean",
    "accuracy_std",
];

/// One configuration summarised over its seeds. Accuracy is in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub library: String,
    pub learner: String,
    pub ensemble_size: usize,
    pub threads: usize,
    pub minibatch: usize,
    pub wallclock_s_mean: f64,
    pub wallclock_s_std: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
}

impl ReportRow {
    /// Summarises the results of one configuration. Runs that evaluated no
    /// instance are left out of the accuracy statistics.
    pub fn summarize(
        learner: impl Into<String>,
        ensemble_size: usize,
        threads: usize,
        minibatch: usize,
        runs: &[PrequentialResult],
    ) -> Self {
        let times: Vec<f64> = runs.iter().map(|r| r.wallclock_s).collect();
        let accs: Vec<f64> = runs.iter().filter_map(|r| r.accuracy).map(|a| a * 100.0).collect();
        let (wallclock_s_mean, wallclock_s_std) = mean_std(&times);
        let (accuracy_mean, accuracy_std) = mean_std(&accs);
        Self {
            library: LIBRARY_TAG.to_string(),
            learner: learner.into(),
            ensemble_size,
            threads,
            minibatch,
            wallclock_s_mean,
            wallclock_s_std,
            accuracy_mean,
            accuracy_std,
        }
    }
}

/// Mean and sample standard deviation. The deviation is 0 for fewer than two
/// values; both are NaN for none.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn csv_err(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.library.clone(),
            r.learner.clone(),
            r.ensemble_size.to_string(),
            r.threads.to_string(),
            r.minibatch.to_string(),
            format!("{:.6}", r.wallclock_s_mean),
            format!("{:.6}", r.wallclock_s_std),
            format!("{:.3}", r.accuracy_mean),
            format!("{:.3}", r.accuracy_std),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// Human-readable table with aligned columns, `mean ± std` cells.
pub fn write_report_text<W: Write>(rows: &[ReportRow], mut out: W) -> io::Result<()> {
    let header = ["library", "learner", "size", "threads", "batch", "wallclock (s)", "accuracy (%)"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.library.clone(),
                r.learner.clone(),
                r.ensemble_size.to_string(),
                r.threads.to_string(),
                r.minibatch.to_string(),
                format!("{:.3} ± {:.3}", r.wallclock_s_mean, r.wallclock_s_std),
                format!("{:.3} ± {:.3}", r.accuracy_mean, r.accuracy_std),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |out: &mut W, row: &[String]| -> io::Result<()> {
        let padded: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i < 2 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        writeln!(out, "{}", padded.join("  ").trim_end())
    };
    line(&mut out, &header.map(String::from))?;
    for row in &cells {
        line(&mut out, row)?;
    }
    Ok(())
}

/// Windowed series, one line per snapshot; undefined metrics are empty.
pub fn write_windowed_csv<'a, W, I>(runs: I, out: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a [MetricSnapshot])>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "position", "accuracy", "kappa"]).map_err(csv_err)?;
    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    for (seed, series) in runs {
        for s in series {
            w.write_record([
                seed.to_string(),
                s.position.to_string(),
                fmt(s.accuracy),
                fmt(s.kappa),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
}
