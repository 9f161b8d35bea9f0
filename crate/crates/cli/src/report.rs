//! Summary reports: method comparison tables and histogram emission.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use invertor_core::stats::quartiles;

use crate::config::ExperimentConfig;
use crate::experiment::{run_experiment, ExperimentOutput};

/// One method's final-score statistics over its runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: String,
    pub runs: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl MethodRow {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Ranking of several method configs on one shared problem.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Rows ordered by descending median final log-score.
    pub rows: Vec<MethodRow>,
    /// Whether median(seq-mh) >= median(particle-gibbs) >= median(mh);
    /// `None` when not all three methods are present.
    pub seq_pg_mh_ordering: Option<bool>,
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>6} {:>12} {:>12} {:>12} {:>10}  rank",
            "method", "runs", "median", "q1", "q3", "iqr"
        )?;
        for (rank, row) in self.rows.iter().enumerate() {
            writeln!(
                f,
                "{:<16} {:>6} {:>12.4} {:>12.4} {:>12.4} {:>10.4}  {}",
                row.method,
                row.runs,
                row.median,
                row.q1,
                row.q3,
                row.iqr(),
                rank + 1
            )?;
        }
        match self.seq_pg_mh_ordering {
            Some(true) => writeln!(f, "ordering seq-mh >= particle-gibbs >= mh: holds"),
            Some(false) => writeln!(f, "ordering seq-mh >= particle-gibbs >= mh: does NOT hold"),
            None => Ok(()),
        }
    }
}

fn median_of(report: &[MethodRow], method: &str) -> Option<f64> {
    report.iter().find(|r| r.method == method).map(|r| r.median)
}

/// Build a comparison row from one experiment's final scores.
pub fn method_row(config: &ExperimentConfig, output: &ExperimentOutput) -> MethodRow {
    let scores = output.final_scores();
    let (q1, median, q3) = quartiles(&scores);
    MethodRow {
        method: config.method.kind_name().to_string(),
        runs: scores.len(),
        median,
        q1,
        q3,
    }
}

fn check_shared_problem(configs: &[ExperimentConfig]) -> Result<()> {
    let first = &configs[0];
    for c in &configs[1..] {
        if c.simulator != first.simulator
            || c.data_path != first.data_path
            || c.gamma != first.gamma
            || c.horizon != first.horizon
        {
            bail!(
                "configs must share simulator, data, gamma, and horizon; \
                 `{}` differs from `{}`",
                c.output_dir.display(),
                first.output_dir.display()
            );
        }
    }
    Ok(())
}

/// Run every config and rank the methods by median final log-score.
pub fn compare_methods(configs: &[ExperimentConfig]) -> Result<ComparisonReport> {
    if configs.is_empty() {
        bail!("compare needs at least one config");
    }
    check_shared_problem(configs)?;

    let mut rows = Vec::with_capacity(configs.len());
    for config in configs {
        let output = run_experiment(config)?;
        rows.push(method_row(config, &output));
    }
    rows.sort_by(|a, b| b.median.partial_cmp(&a.median).expect("finite medians"));

    let ordering = match (
        median_of(&rows, "seq-mh"),
        median_of(&rows, "particle-gibbs"),
        median_of(&rows, "mh"),
    ) {
        (Some(seq), Some(pg), Some(mh)) => Some(seq >= pg && pg >= mh),
        _ => None,
    };

    Ok(ComparisonReport {
        rows,
        seq_pg_mh_ordering: ordering,
    })
}

pub fn write_comparison_csv(report: &ComparisonReport, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["rank", "method", "runs", "median", "q1", "q3", "iqr"])?;
    for (rank, row) in report.rows.iter().enumerate() {
        writer.write_record([
            (rank + 1).to_string(),
            row.method.clone(),
            row.runs.to_string(),
            row.median.to_string(),
            row.q1.to_string(),
            row.q3.to_string(),
            row.iqr().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// One histogram bin over final log-scores: `[low, high)`, last bin closed.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: u64,
}

/// Equal-width histogram over `[min, max]`. Identical scores produce a unit
/// span centered on the common value, so everything lands in one bin.
pub fn histogram(scores: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if scores.is_empty() {
        bail!("histogram needs at least one score");
    }
    if bins == 0 {
        bail!("bins must be >= 1");
    }
    let mut lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            low: lo + i as f64 * width,
            high: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &s in scores {
        let idx = (((s - lo) / width).floor() as usize).min(bins - 1);
        out[idx].count += 1;
    }
    Ok(out)
}

pub fn write_histogram_csv(bins: &[HistogramBin], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["bin_low", "bin_high", "count"])?;
    for bin in bins {
        writer.write_record([
            bin.low.to_string(),
            bin.high.to_string(),
            bin.count.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Companion plot script: reads the emitted CSV and renders the histogram.
pub fn write_plot_script(path: &Path, csv_name: &str) -> Result<()> {
    let script = format!(
        r#"#!/usr/bin/env python3
"""Render the log-score histogram emitted next to this script."""
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

csv_path = Path(__file__).parent / "{csv_name}"
lows, highs, counts = [], [], []
with open(csv_path) as f:
    for row in csv.DictReader(f):
        lows.append(float(row["bin_low"]))
        highs.append(float(row["bin_high"]))
        counts.append(int(row["count"]))

widths = [h - l for l, h in zip(lows, highs)]
plt.figure(figsize=(6, 4))
plt.bar(lows, counts, width=widths, align="edge", edgecolor="black")
plt.xlabel("final log-score")
plt.ylabel("runs")
plt.tight_layout()
out = csv_path.with_suffix(".png")
plt.savefig(out, dpi=150)
print(f"wrote {{out}}", file=sys.stderr)
"#
    );
    fs::write(path, script).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
