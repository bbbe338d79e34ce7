//! Cross-seed statistics and CSV export.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::EvalRecord;
use crate::error::{Error, Result};

/// Trailing smoothing window.
pub const SMOOTH_WINDOW: usize = 5;

/// Normal-approximation 95% quantile.
pub const Z95: f64 = 1.96;

/// Column order of exported CSV files.
pub const CSV_HEADER: [&str; 9] = [
    "study",
    "mask",
    "noise_preset",
    "seed_count",
    "step",
    "metric",
    "mean",
    "ci95",
    "smoothed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: u64,
    pub mean: f64,
    /// Half-width of the 95% interval around `mean`.
    pub ci95: f64,
    pub smoothed: f64,
}

/// One metric aggregated over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub study: String,
    pub mask: String,
    pub noise: String,
    pub metric: String,
    pub seed_count: usize,
    /// Set when a single seed makes the interval undefined; `ci95` is 0.
    pub ci_undefined: bool,
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    pub fn last(&self) -> Option<&CurvePoint> {
        self.points.last()
    }

    /// Largest smoothed value along the curve.
    pub fn best_smoothed(&self) -> Option<f64> {
        self.points.iter().map(|p| p.smoothed).reduce(f64::max)
    }
}

/// Mean and 95% half-width of `xs` (sample standard deviation).
pub fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * var.sqrt() / n.sqrt())
}

/// Trailing mean over up to `window` points, truncated at the start.
pub fn smooth_trailing(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..xs.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            let s = &xs[lo..=i];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect()
}

/// Aggregates one metric of per-seed `(step, value)` series. All seeds must
/// share the same steps.
pub fn aggregate(series: &[Vec<(u64, f64)>]) -> Result<(Vec<CurvePoint>, bool)> {
    let first = series
        .first()
        .ok_or_else(|| Error::Usage("cannot aggregate zero seeds".into()))?;
    for s in series {
        if s.len() != first.len() || s.iter().zip(first).any(|(a, b)| a.0 != b.0) {
            return Err(Error::Usage("seed curves have different evaluation steps".into()));
        }
    }
    let stats: Vec<(u64, f64, f64)> = (0..first.len())
        .map(|k| {
            let xs: Vec<f64> = series.iter().map(|s| s[k].1).collect();
            let (m, c) = mean_ci(&xs);
            (first[k].0, m, c)
        })
        .collect();
    let means: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let smoothed = smooth_trailing(&means, SMOOTH_WINDOW);
    let points = stats
        .into_iter()
        .zip(smoothed)
        .map(|((step, mean, ci95), smoothed)| CurvePoint {
            step,
            mean,
            ci95,
            smoothed,
        })
        .collect();
    Ok((points, series.len() == 1))
}

/// Aggregates every metric of per-seed evaluation curves.
pub fn aggregate_records(
    study: &str,
    mask: &str,
    noise: &str,
    per_seed: &[Vec<EvalRecord>],
) -> Result<Vec<AggregateCurve>> {
    EvalRecord::METRICS
        .iter()
        .map(|&metric| {
            let series: Vec<Vec<(u64, f64)>> = per_seed
                .iter()
                .map(|c| c.iter().map(|r| (r.step, r.metric(metric).unwrap_or(f64::NAN))).collect())
                .collect();
            let (points, ci_undefined) = aggregate(&series)?;
            Ok(AggregateCurve {
                study: study.into(),
                mask: mask.into(),
                noise: noise.into(),
                metric: metric.into(),
                seed_count: per_seed.len(),
                ci_undefined,
                points,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub study: String,
    pub mask: String,
    pub noise_preset: String,
    pub seed_count: usize,
    pub step: u64,
    pub metric: String,
    pub mean: f64,
    pub ci95: f64,
    pub smoothed: f64,
}

pub fn csv_rows(curves: &[AggregateCurve]) -> Vec<CsvRow> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(move |p| CsvRow {
                study: c.study.clone(),
                mask: c.mask.clone(),
                noise_preset: c.noise.clone(),
                seed_count: c.seed_count,
                step: p.step,
                metric: c.metric.clone(),
                mean: p.mean,
                ci95: p.ci95,
                smoothed: p.smoothed,
            })
        })
        .collect()
}

/// Writes one row per (curve, step).
pub fn export_csv(curves: &[AggregateCurve], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    // Header written by hand so an empty export still carries it.
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Usage(format!("{}: {other:?}", path.display())),
    };
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in csv_rows(curves) {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads rows written by [`export_csv`], checking the header.
pub fn parse_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let header = r.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(perr(1, format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| perr(i + 2, e.to_string())))
        .collect()
}
