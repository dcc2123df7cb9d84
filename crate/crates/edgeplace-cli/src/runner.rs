//! Execute a manifest: build the trace, sweep the grid, run each cell
//! through the simulator, and write the report files.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use edgeplace::ingest::{
    fit_dims, inject_outliers, label_clean, load_trace, synth_stream, LabeledVector,
};
use edgeplace::model::DataVector;
use edgeplace::simulator::run_experiment;

use crate::error::CliError;
use crate::manifest::{ExperimentManifest, TraceSource};
use crate::report::{results_csv, stats_csv, summary_table, CellResult};

/// Paths of everything a run wrote.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub results_csv: PathBuf,
    pub summary: PathBuf,
    pub manifest_copy: PathBuf,
    pub stats_files: Vec<PathBuf>,
    pub cells: Vec<CellResult>,
}

/// Load the trace at its native width (before any per-cell reshaping).
fn load_base_trace(source: &TraceSource, cell_dims: usize) -> Result<Vec<DataVector>, CliError> {
    match source {
        TraceSource::File {
            path, base_dims, ..
        } => Ok(load_trace(path, base_dims.unwrap_or(cell_dims))?),
        TraceSource::Synthetic {
            count, specs, seed, ..
        } => Ok(synth_stream(*count, specs.len(), specs, *seed)?),
    }
}

fn trace_limit(source: &TraceSource) -> Option<usize> {
    match source {
        TraceSource::File { limit, .. } | TraceSource::Synthetic { limit, .. } => *limit,
    }
}

/// Reshape the base trace to a cell's width, apply the vector limit, and
/// inject labeled outliers.
fn cell_trace(
    manifest: &ExperimentManifest,
    base: &[DataVector],
    dims: usize,
) -> Result<Vec<LabeledVector>, CliError> {
    let mut shaped = fit_dims(base, dims)?;
    if let Some(limit) = trace_limit(&manifest.trace) {
        shaped.truncate(limit);
    }
    let injection = &manifest.injection;
    if injection.rate == 0.0 {
        Ok(label_clean(shaped))
    } else {
        Ok(inject_outliers(
            &shaped,
            injection.rate,
            injection.magnitude,
            injection.seed,
        )?)
    }
}

/// Run every grid cell and write `results.csv`, per-cell stats files,
/// `summary.txt`, and a copy of the manifest into the output directory.
pub fn run_manifest(manifest: &ExperimentManifest) -> Result<RunArtifacts, CliError> {
    let cells = manifest.grid.cells(&manifest.config);
    fs::create_dir_all(&manifest.out_dir)?;

    // The base trace only depends on the manifest; cache reshaped traces per
    // cell width since several cells usually share one.
    let widest = cells
        .iter()
        .map(|c| c.dims)
        .max()
        .unwrap_or(manifest.config.dims);
    let base = load_base_trace(&manifest.trace, widest)?;
    let mut traces: BTreeMap<usize, Vec<LabeledVector>> = BTreeMap::new();

    let mut results = Vec::with_capacity(cells.len());
    let mut stats_files = Vec::with_capacity(cells.len());
    for key in cells {
        if let std::collections::btree_map::Entry::Vacant(slot) = traces.entry(key.dims) {
            slot.insert(cell_trace(manifest, &base, key.dims)?);
        }
        let trace = &traces[&key.dims];
        let config = key.apply(&manifest.config);
        let report = run_experiment(&config, trace)?;

        let stats_path = manifest.out_dir.join(format!("stats_{}.csv", key.tag()));
        fs::write(&stats_path, stats_csv(&report))?;
        stats_files.push(stats_path);
        results.push(CellResult {
            key,
            seed: config.seed,
            report,
        });
    }

    let results_path = manifest.out_dir.join("results.csv");
    fs::write(&results_path, results_csv(&results))?;
    let summary_path = manifest.out_dir.join("summary.txt");
    fs::write(&summary_path, summary_table(&results))?;
    let manifest_path = manifest.out_dir.join("manifest.toml");
    manifest.save(&manifest_path)?;

    Ok(RunArtifacts {
        results_csv: results_path,
        summary: summary_path,
        manifest_copy: manifest_path,
        stats_files,
        cells: results,
    })
}
