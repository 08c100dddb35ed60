//! Aggregation of trial runs into the summary and convergence tables.

use serde::{Deserialize, Serialize};

use super::{Averaging, NoisePoint, TrialRun};
use crate::{from_db, to_db};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub point_index: usize,
    pub point_label: f64,
    pub mean_noise_power: f64,
    pub mean_allzero_snr_db: f64,
    /// Mean noise-free SINR of the returned configurations (dB).
    pub mean_sinr_db: f64,
    pub stderr_db: f64,
    pub mean_evaluations: f64,
    pub trials: usize,
}

/// Mean best-so-far indicator after each generation (or recording interval).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub algorithm: String,
    pub point_index: usize,
    pub point_label: f64,
    pub generation: usize,
    pub mean_best_db: f64,
    pub mean_evaluations: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub averaging: Averaging,
    /// Algorithm-major, then noise point.
    pub rows: Vec<SummaryRow>,
    pub curves: Vec<CurveRow>,
}

impl SummaryTable {
    pub fn row(&self, algorithm: &str, point_index: usize) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.point_index == point_index)
    }

    /// Mean best-so-far curve of `algorithm` at `point_index`.
    pub fn curve(&self, algorithm: &str, point_index: usize) -> Vec<f64> {
        self.curves
            .iter()
            .filter(|c| c.algorithm == algorithm && c.point_index == point_index)
            .map(|c| c.mean_best_db)
            .collect()
    }
}

/// Mean and standard error of dB samples in the requested domain. Linear
/// averaging maps the standard error back to dB to first order.
fn mean_stderr(samples: &[f64], averaging: Averaging) -> (f64, f64) {
    let n = samples.len() as f64;
    let values: Vec<f64> = match averaging {
        Averaging::Db => samples.to_vec(),
        Averaging::Linear => samples.iter().map(|&x| from_db(x)).collect(),
    };
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if samples.len() > 1 {
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    match averaging {
        Averaging::Db => (mean, stderr),
        Averaging::Linear => (to_db(mean), 10.0 / std::f64::consts::LN_10 * stderr / mean),
    }
}

/// Builds the summary and curve tables from `runs`. Pairs without any run
/// are skipped, so an empty run list gives empty tables.
pub fn summarize(
    algorithms: &[&str],
    points: &[NoisePoint],
    runs: &[TrialRun],
    averaging: Averaging,
) -> SummaryTable {
    let mut table = SummaryTable {
        averaging,
        ..SummaryTable::default()
    };
    for &algorithm in algorithms {
        for (p, point) in points.iter().enumerate() {
            let group: Vec<&TrialRun> = runs
                .iter()
                .filter(|r| r.algorithm == algorithm && r.point_index == p)
                .collect();
            if group.is_empty() {
                continue;
            }
            let n = group.len() as f64;
            let finals: Vec<f64> = group.iter().map(|r| r.final_sinr_db).collect();
            let (mean_sinr_db, stderr_db) = mean_stderr(&finals, averaging);
            table.rows.push(SummaryRow {
                algorithm: algorithm.to_string(),
                point_index: p,
                point_label: point.label,
                mean_noise_power: group.iter().map(|r| r.noise_power).sum::<f64>() / n,
                mean_allzero_snr_db: group.iter().map(|r| r.allzero_snr_db).sum::<f64>() / n,
                mean_sinr_db,
                stderr_db,
                mean_evaluations: group.iter().map(|r| r.record.evaluations as f64).sum::<f64>() / n,
                trials: group.len(),
            });
            table.curves.extend(mean_curve(algorithm, p, point.label, &group, averaging));
        }
    }
    table
}

/// Averages best-so-far curves generation by generation. A run that stopped
/// early holds its last value for the remaining generations.
fn mean_curve(
    algorithm: &str,
    point_index: usize,
    point_label: f64,
    group: &[&TrialRun],
    averaging: Averaging,
) -> Vec<CurveRow> {
    let len = group.iter().map(|r| r.record.per_generation.len()).max().unwrap_or(0);
    (0..len)
        .filter_map(|g| {
            let stats: Vec<_> = group
                .iter()
                .filter_map(|r| {
                    let gens = &r.record.per_generation;
                    gens.get(g).or(gens.last())
                })
                .collect();
            if stats.is_empty() {
                return None;
            }
            let values: Vec<f64> = stats.iter().map(|s| s.best_indicator).collect();
            let (mean_best_db, _) = mean_stderr(&values, averaging);
            Some(CurveRow {
                algorithm: algorithm.to_string(),
                point_index,
                point_label,
                generation: g,
                mean_best_db,
                mean_evaluations: stats.iter().map(|s| s.evaluations as f64).sum::<f64>() / stats.len() as f64,
            })
        })
        .collect()
}
