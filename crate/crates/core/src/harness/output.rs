//! Experiment files: summary CSV, convergence-curve CSV, line-delimited JSON
//! run records and an optional matplotlib script.
//!
//! CSV numbers carry six significant digits. The JSON records keep full
//! precision so that aggregates can be recomputed from them exactly and every
//! returned configuration can be rebuilt.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Experiment, ExperimentConfig, NoisePoint, TrialRun};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub summary_csv: PathBuf,
    pub curves_csv: PathBuf,
    pub records_jsonl: PathBuf,
    pub plot_script: Option<PathBuf>,
}

impl OutputPaths {
    /// Standard file names inside `dir`.
    pub fn in_dir(dir: &Path, with_plot_script: bool) -> Self {
        Self {
            summary_csv: dir.join("summary.csv"),
            curves_csv: dir.join("curves.csv"),
            records_jsonl: dir.join("records.jsonl"),
            plot_script: with_plot_script.then(|| dir.join("plot.py")),
        }
    }
}

/// One line of the run-records file: a header echoing the configuration,
/// followed by one line per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordLine {
    Header {
        version: String,
        config: ExperimentConfig,
        points: Vec<NoisePoint>,
    },
    Run(TrialRun),
}

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "algorithm",
    "point",
    "point_label",
    "noise_power",
    "allzero_snr_db",
    "mean_sinr_db",
    "stderr_db",
    "mean_evaluations",
    "trials",
];

pub const CURVES_HEADER: [&str; 6] = [
    "algorithm",
    "point",
    "point_label",
    "generation",
    "mean_best_db",
    "mean_evaluations",
];

/// Writes every file named in `paths`.
pub fn emit_outputs(experiment: &Experiment, paths: &OutputPaths) -> Result<()> {
    let table = &experiment.summary;
    let summary = csv_bytes(
        &SUMMARY_HEADER,
        table.rows.iter().map(|r| {
            vec![
                r.algorithm.clone(),
                r.point_index.to_string(),
                fmt_sig(r.point_label),
                fmt_sig(r.mean_noise_power),
                fmt_sig(r.mean_allzero_snr_db),
                fmt_sig(r.mean_sinr_db),
                fmt_sig(r.stderr_db),
                fmt_sig(r.mean_evaluations),
                r.trials.to_string(),
            ]
        }),
    );
    write_file(&paths.summary_csv, &summary)?;

    let curves = csv_bytes(
        &CURVES_HEADER,
        table.curves.iter().map(|c| {
            vec![
                c.algorithm.clone(),
                c.point_index.to_string(),
                fmt_sig(c.point_label),
                c.generation.to_string(),
                fmt_sig(c.mean_best_db),
                fmt_sig(c.mean_evaluations),
            ]
        }),
    );
    write_file(&paths.curves_csv, &curves)?;

    let mut records = Vec::new();
    let header = RecordLine::Header {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: experiment.config.clone(),
        points: experiment.points.clone(),
    };
    for line in std::iter::once(header).chain(experiment.runs.iter().cloned().map(RecordLine::Run)) {
        serde_json::to_writer(&mut records, &line).expect("records serialize");
        records.push(b'\n');
    }
    write_file(&paths.records_jsonl, &records)?;

    if let Some(path) = &paths.plot_script {
        write_file(path, plot_script(paths).as_bytes())?;
    }
    Ok(())
}

/// Reads a run-records file back.
pub fn read_records(path: &Path) -> Result<Vec<RecordLine>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?;
        lines.push(parsed);
    }
    Ok(lines)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Python script that renders the two CSVs (SINR vs. all-zero SNR, and the
/// mean convergence curves at the last noise point).
pub fn plot_script(paths: &OutputPaths) -> String {
    format!(
        r#"#!/usr/bin/env python3
"""Plots written alongside the experiment outputs. Run from this directory."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt


def read(name):
    with open(name, newline="") as f:
        return list(csv.DictReader(f))


summary = read("{summary}")
curves = read("{curves}")

fig, ax = plt.subplots()
by_algo = defaultdict(list)
for row in summary:
    by_algo[row["algorithm"]].append((float(row["allzero_snr_db"]), float(row["mean_sinr_db"])))
for algo, pts in by_algo.items():
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=algo)
ax.set_xlabel("all-zero SNR (dB)")
ax.set_ylabel("mean SINR (dB)")
ax.grid(True)
ax.legend()
fig.savefig("sinr_vs_snr.png", dpi=150)

last_point = max(int(row["point"]) for row in curves) if curves else 0
fig, ax = plt.subplots()
by_algo = defaultdict(list)
for row in curves:
    if int(row["point"]) == last_point:
        by_algo[row["algorithm"]].append((int(row["generation"]), float(row["mean_best_db"])))
for algo, pts in by_algo.items():
    if len(pts) > 1:
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=algo)
ax.set_xlabel("generation")
ax.set_ylabel("mean best-so-far SINR (dB)")
ax.grid(True)
ax.legend()
fig.savefig("convergence.png", dpi=150)
"#,
        summary = file_name(&paths.summary_csv),
        curves = file_name(&paths.curves_csv),
    )
}
