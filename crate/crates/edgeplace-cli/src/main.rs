//! `edgeplace` binary: run one experiment or a manifest-defined grid.
//!
//! Every long flag can also be set through an `EDGEPLACE_*` environment
//! variable; flags override the manifest, which overrides built-in defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use edgeplace::config::BandwidthPolicy;
use edgeplace_cli::manifest::{ExperimentManifest, TraceSource};
use edgeplace_cli::report::sig6;
use edgeplace_cli::runner::run_manifest;

#[derive(Debug, Parser)]
#[command(
    name = "edgeplace",
    about = "Outlier-gated data placement simulator for edge node groups",
    version
)]
struct Cli {
    /// TOML experiment manifest; flags below override its fields.
    #[arg(long, env = "EDGEPLACE_MANIFEST")]
    manifest: Option<PathBuf>,

    /// Number of nodes in the group.
    #[arg(long, env = "EDGEPLACE_NODES")]
    nodes: Option<usize>,

    /// Vector dimensionality M.
    #[arg(long, env = "EDGEPLACE_DIMS")]
    dims: Option<usize>,

    /// Replication fan-out k.
    #[arg(long, env = "EDGEPLACE_TOPK")]
    topk: Option<usize>,

    /// Distance-quanta window length W.
    #[arg(long, env = "EDGEPLACE_WINDOW")]
    window: Option<usize>,

    /// Similarity threshold on distance quanta.
    #[arg(long, env = "EDGEPLACE_EPSILON")]
    epsilon: Option<f64>,

    /// Fixed KDE bandwidth (default: data-driven per window).
    #[arg(long, env = "EDGEPLACE_BANDWIDTH")]
    bandwidth: Option<f64>,

    /// First-stage vote threshold over detectors.
    #[arg(long, env = "EDGEPLACE_DELTA")]
    delta: Option<f64>,

    /// Second-stage vote threshold over datasets (default: adaptive majority).
    #[arg(long = "delta-prime", env = "EDGEPLACE_DELTA_PRIME")]
    delta_prime: Option<usize>,

    /// Arrivals between synopsis broadcasts.
    #[arg(long = "epoch-length", env = "EDGEPLACE_EPOCH_LENGTH")]
    epoch_length: Option<u64>,

    /// Master seed for arrival assignment.
    #[arg(long, env = "EDGEPLACE_SEED")]
    seed: Option<u64>,

    /// CSV trace file to ingest (replaces the manifest's trace source).
    #[arg(long, env = "EDGEPLACE_TRACE")]
    trace: Option<PathBuf>,

    /// Fraction of vectors perturbed into ground-truth outliers.
    #[arg(long = "outlier-rate", env = "EDGEPLACE_OUTLIER_RATE")]
    outlier_rate: Option<f64>,

    /// Outlier shift in per-column std multiples (must exceed 3).
    #[arg(long = "outlier-magnitude", env = "EDGEPLACE_OUTLIER_MAGNITUDE")]
    outlier_magnitude: Option<f64>,

    /// Directory for results.csv, stats files, and the summary.
    #[arg(long = "out-dir", env = "EDGEPLACE_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

impl Cli {
    fn into_manifest(self) -> Result<ExperimentManifest, edgeplace_cli::CliError> {
        let mut manifest = match &self.manifest {
            Some(path) => ExperimentManifest::load(path)?,
            None => ExperimentManifest::default(),
        };
        if let Some(v) = self.nodes {
            manifest.config.nodes = v;
        }
        if let Some(v) = self.dims {
            manifest.config.dims = v;
        }
        if let Some(v) = self.topk {
            manifest.config.top_k = v;
        }
        if let Some(v) = self.window {
            manifest.config.window = v;
        }
        if let Some(v) = self.epsilon {
            manifest.config.epsilon = v;
        }
        if let Some(v) = self.bandwidth {
            manifest.config.bandwidth = BandwidthPolicy::Fixed(v);
        }
        if let Some(v) = self.delta {
            manifest.config.delta = v;
        }
        if let Some(v) = self.delta_prime {
            manifest.config.delta_prime = Some(v);
        }
        if let Some(v) = self.epoch_length {
            manifest.config.epoch_length = v;
        }
        if let Some(v) = self.seed {
            manifest.config.seed = v;
        }
        if let Some(path) = self.trace {
            manifest.trace = TraceSource::File {
                path,
                base_dims: None,
                limit: None,
            };
        }
        if let Some(v) = self.outlier_rate {
            manifest.injection.rate = v;
        }
        if let Some(v) = self.outlier_magnitude {
            manifest.injection.magnitude = v;
        }
        if let Some(dir) = self.out_dir {
            manifest.out_dir = dir;
        }
        Ok(manifest)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let manifest = match cli.into_manifest() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match run_manifest(&manifest) {
        Ok(artifacts) => {
            for cell in &artifacts.cells {
                println!(
                    "cell {}: omega={} tau={} repl_msgs={} syn_msgs={} baseline={} vec/s={}",
                    cell.key.tag(),
                    sig6(cell.report.omega),
                    sig6(cell.report.tau),
                    cell.report.replication_messages,
                    cell.report.synopsis_messages,
                    cell.report.baseline_messages,
                    sig6(cell.report.vectors_per_sec),
                );
            }
            println!("wrote {}", artifacts.results_csv.display());
            println!("wrote {}", artifacts.summary.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
