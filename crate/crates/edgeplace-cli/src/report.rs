//! Stable text output: CSV rows at fixed precision, per-cell dataset stats,
//! and the human-readable omega/tau summary grid.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use edgeplace::simulator::ExperimentReport;

use crate::manifest::CellKey;

/// One finished grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub key: CellKey,
    pub seed: u64,
    pub report: ExperimentReport,
}

/// Header of the per-run results CSV. `vectors_per_sec` is the only
/// timing-dependent column; everything else is deterministic for a given
/// manifest.
pub const RESULTS_HEADER: &str =
    "N,k,M,W,omega,tau,repl_msgs,syn_msgs,baseline_msgs,mean_sigma,vectors_per_sec,seed";

/// Format with six significant digits, plain decimal notation.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if magnitude >= 6 {
        // Integral part alone exceeds six digits: round into it.
        let scale = 10f64.powi(magnitude - 5);
        return format!("{:.0}", (x / scale).round() * scale);
    }
    let precision = (5 - magnitude).max(0) as usize;
    format!("{x:.precision$}")
}

pub fn results_row(cell: &CellResult) -> String {
    let r = &cell.report;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        cell.key.nodes,
        cell.key.top_k,
        cell.key.dims,
        cell.key.window,
        sig6(r.omega),
        sig6(r.tau),
        r.replication_messages,
        r.synopsis_messages,
        r.baseline_messages,
        sig6(r.mean_sigma),
        sig6(r.vectors_per_sec),
        cell.seed,
    )
}

pub fn results_csv(cells: &[CellResult]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for cell in cells {
        out.push_str(&results_row(cell));
        out.push('\n');
    }
    out
}

/// Per-dataset final moments for one cell: one row per node.
pub fn stats_csv(report: &ExperimentReport) -> String {
    let dims = report
        .per_dataset_stats
        .first()
        .map(|s| s.means.len())
        .unwrap_or(0);
    let mut out = String::from("node,size");
    for d in 0..dims {
        let _ = write!(out, ",mean_{d}");
    }
    for d in 0..dims {
        let _ = write!(out, ",std_{d}");
    }
    out.push('\n');
    for stats in &report.per_dataset_stats {
        let _ = write!(out, "{},{}", stats.node_id.0, stats.size);
        for m in &stats.means {
            let _ = write!(out, ",{}", sig6(*m));
        }
        for s in &stats.stds {
            let _ = write!(out, ",{}", sig6(*s));
        }
        out.push('\n');
    }
    out
}

/// Omega/tau grid, one block per window length: rows are node counts,
/// column groups are (k, M) pairs.
pub fn summary_table(cells: &[CellResult]) -> String {
    let windows: BTreeSet<usize> = cells.iter().map(|c| c.key.window).collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "omega = fraction of injected outliers rejected; tau = mean stored local-outlier fraction"
    );
    for window in windows {
        let block: Vec<&CellResult> = cells.iter().filter(|c| c.key.window == window).collect();
        let nodes: BTreeSet<usize> = block.iter().map(|c| c.key.nodes).collect();
        let ks: BTreeSet<usize> = block.iter().map(|c| c.key.top_k).collect();
        let ms: BTreeSet<usize> = block.iter().map(|c| c.key.dims).collect();

        let _ = writeln!(out, "\nW={window}");
        let mut header = format!("{:>6} ", "N");
        let mut subheader = format!("{:>6} ", "");
        for k in &ks {
            for m in &ms {
                let _ = write!(header, "|{:^15}", format!("k={k} M={m}"));
                let _ = write!(subheader, "|{:>7}{:>8}", "omega", "tau");
            }
        }
        let _ = writeln!(out, "{header}");
        let _ = writeln!(out, "{subheader}");
        for n in &nodes {
            let mut row = format!("{n:>6} ");
            for k in &ks {
                for m in &ms {
                    match block
                        .iter()
                        .find(|c| c.key.nodes == *n && c.key.top_k == *k && c.key.dims == *m)
                    {
                        Some(c) => {
                            let _ = write!(row, "|{:>7.2}{:>8.3}", c.report.omega, c.report.tau);
                        }
                        None => {
                            let _ = write!(row, "|{:>7}{:>8}", "-", "-");
                        }
                    }
                }
            }
            let _ = writeln!(out, "{row}");
        }
    }
    out
}
