//! Experiment manifests: a TOML file describing the pipeline configuration,
//! the trace to feed it, outlier injection, and an optional grid of
//! parameter values to sweep.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use edgeplace::config::PipelineConfig;
use edgeplace::ingest::DistributionSpec;

use crate::error::CliError;

/// Where the input vectors come from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSource {
    /// Delimited text file (comma or semicolon, optional header).
    File {
        path: PathBuf,
        /// How many numeric columns to read from the file. Defaults to each
        /// cell's dimension count; set it to the file's native channel count
        /// to derive wider cells from lagged copies instead.
        #[serde(default)]
        base_dims: Option<usize>,
        /// Keep only the first `limit` loaded vectors.
        #[serde(default)]
        limit: Option<usize>,
    },
    /// Seeded random stream with one distribution per dimension.
    Synthetic {
        count: usize,
        specs: Vec<DistributionSpec>,
        #[serde(default = "default_stream_seed")]
        seed: u64,
        #[serde(default)]
        limit: Option<usize>,
    },
}

fn default_stream_seed() -> u64 {
    99
}

impl Default for TraceSource {
    fn default() -> Self {
        TraceSource::Synthetic {
            count: 1000,
            specs: vec![
                DistributionSpec::Gaussian {
                    mean: 0.5,
                    std: 0.15,
                },
                DistributionSpec::Uniform { lo: 0.0, hi: 1.0 },
            ],
            seed: default_stream_seed(),
            limit: None,
        }
    }
}

/// Ground-truth outlier injection applied to the trace before the run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InjectionSpec {
    /// Fraction of vectors to perturb (0 disables injection).
    pub rate: f64,
    /// Perturbation size in multiples of each column's std; must exceed 3.
    pub magnitude: f64,
    /// RNG seed for positions and directions.
    pub seed: u64,
}

impl Default for InjectionSpec {
    fn default() -> Self {
        InjectionSpec {
            rate: 0.01,
            magnitude: 6.0,
            seed: 7,
        }
    }
}

/// Parameter values to sweep; empty axes fall back to the value in
/// [`PipelineConfig`]. The run covers the full cross product.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridAxes {
    pub nodes: Vec<usize>,
    pub top_k: Vec<usize>,
    pub dims: Vec<usize>,
    pub window: Vec<usize>,
}

impl GridAxes {
    fn axis(values: &[usize], fallback: usize) -> Vec<usize> {
        if values.is_empty() {
            vec![fallback]
        } else {
            values.to_vec()
        }
    }

    /// Expand to concrete cells, outermost axis first: window, nodes, top_k,
    /// dims. A manifest with no grid yields exactly one cell.
    pub fn cells(&self, base: &PipelineConfig) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &window in &Self::axis(&self.window, base.window) {
            for &nodes in &Self::axis(&self.nodes, base.nodes) {
                for &top_k in &Self::axis(&self.top_k, base.top_k) {
                    for &dims in &Self::axis(&self.dims, base.dims) {
                        out.push(CellKey {
                            nodes,
                            top_k,
                            dims,
                            window,
                        });
                    }
                }
            }
        }
        out
    }
}

/// One grid cell's swept parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellKey {
    pub nodes: usize,
    pub top_k: usize,
    pub dims: usize,
    pub window: usize,
}

impl CellKey {
    /// File-name fragment identifying the cell.
    pub fn tag(&self) -> String {
        format!(
            "N{}_k{}_M{}_W{}",
            self.nodes, self.top_k, self.dims, self.window
        )
    }

    pub fn apply(&self, base: &PipelineConfig) -> PipelineConfig {
        PipelineConfig {
            nodes: self.nodes,
            top_k: self.top_k,
            dims: self.dims,
            window: self.window,
            ..base.clone()
        }
    }
}

/// A full experiment description: reloadable to reproduce a run exactly
/// (wall-clock timing aside).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentManifest {
    pub config: PipelineConfig,
    pub trace: TraceSource,
    pub injection: InjectionSpec,
    pub grid: GridAxes,
    pub out_dir: PathBuf,
}

impl Default for ExperimentManifest {
    fn default() -> Self {
        ExperimentManifest {
            config: PipelineConfig::default(),
            trace: TraceSource::default(),
            injection: InjectionSpec::default(),
            grid: GridAxes::default(),
            out_dir: PathBuf::from("results"),
        }
    }
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Write the manifest back out so the run can be reproduced from the
    /// output directory alone.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string_pretty(self).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        fs::write(path, text)?;
        Ok(())
    }
}
