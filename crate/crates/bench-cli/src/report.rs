use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;

use mpmm::tuner::{TuningResult, TuningTable};
use mpmm::PrecisionSpec;
use serde::{Deserialize, Serialize};

use crate::host::HostInfo;

/// One CSV line: a tuning result plus the host it was measured on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub prec: String,
    pub n: usize,
    pub threads: usize,
    pub best_n_min: usize,
    pub block_time_s: f64,
    pub prediction_time_s: f64,
    pub predicted_s: f64,
    pub rel_diff: f64,
    pub simple_time_s: Option<f64>,
    pub strassen_time_s: f64,
    pub winner: String,
    pub cpu: String,
    pub available_threads: usize,
}

impl ReportRow {
    pub fn new(r: &TuningResult, host: &HostInfo) -> Self {
        Self {
            prec: r.prec.short_name(),
            n: r.n,
            threads: r.threads,
            best_n_min: r.best_n_min,
            block_time_s: r.block_time_s,
            prediction_time_s: r.prediction_time_s,
            predicted_s: r.predicted_s,
            rel_diff: r.rel_diff,
            simple_time_s: r.simple_time_s,
            strassen_time_s: r.strassen_time_s,
            winner: r.winner.to_string(),
            cpu: host.cpu.clone(),
            available_threads: host.available_threads,
        }
    }
}

fn unknown_host() -> HostInfo {
    HostInfo {
        cpu: "unknown".into(),
        available_threads: 0,
    }
}

/// Rows sorted by (precision, n, threads), tagged with the table's host.
pub fn report_rows(table: &TuningTable) -> Vec<ReportRow> {
    let host = HostInfo::from_comments(&table.comments).unwrap_or_else(unknown_host);
    let mut rows: Vec<&TuningResult> = table.rows.iter().collect();
    rows.sort_by_key(|r| (r.prec, r.n, r.threads));
    rows.into_iter().map(|r| ReportRow::new(r, &host)).collect()
}

pub fn write_csv<W: io::Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> csv::Result<Vec<ReportRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Winning algorithm per (n, precision), one grid per thread count.
/// Missing grid points show `-`.
pub fn winners_grid(table: &TuningTable) -> String {
    let precs: BTreeSet<PrecisionSpec> = table.rows.iter().map(|r| r.prec).collect();
    let dims: BTreeSet<usize> = table.rows.iter().map(|r| r.n).collect();
    let threads: BTreeSet<usize> = table.rows.iter().map(|r| r.threads).collect();
    let mut out = String::new();
    if let Some(host) = HostInfo::from_comments(&table.comments) {
        let _ = writeln!(
            out,
            "# host: {} ({} threads)",
            host.cpu, host.available_threads
        );
    }
    for &t in &threads {
        let mut grid = vec![std::iter::once("n".to_string())
            .chain(precs.iter().map(|p| p.short_name()))
            .collect::<Vec<_>>()];
        for &n in &dims {
            let mut line = vec![n.to_string()];
            for &p in &precs {
                let cell = table
                    .rows
                    .iter()
                    .find(|r| r.prec == p && r.n == n && r.threads == t)
                    .map_or_else(|| "-".to_string(), |r| r.winner.to_string());
                line.push(cell);
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let _ = writeln!(out, "threads {t}");
        for line in grid {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
    }
    out
}
