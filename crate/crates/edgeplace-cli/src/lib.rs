//! Manifest-driven experiment runner for the `edgeplace` pipeline.
//!
//! A manifest (TOML) names the trace source, outlier injection parameters,
//! the pipeline configuration, and optional grid axes to sweep. Running it
//! produces a `results.csv` with one row per grid cell, a per-cell dataset
//! stats file, a human-readable omega/tau summary, and a copy of the
//! manifest for reproduction.

pub mod error;
pub mod manifest;
pub mod report;
pub mod runner;

pub use error::CliError;
pub use manifest::{ExperimentManifest, GridAxes, InjectionSpec, TraceSource};
pub use runner::{run_manifest, RunArtifacts};
