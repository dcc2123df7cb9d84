//! Decentralized outlier-aware data placement for groups of edge nodes.
//!
//! Each node keeps running moments over its local dataset and periodically
//! broadcasts them as a compact synopsis. An arriving vector is screened by
//! an ensemble of three statistical detectors evaluated against every peer
//! synopsis; a double majority vote (detectors within a dataset, then across
//! datasets) decides whether the vector is an outlier. Rejected vectors are
//! deferred to the cloud; accepted vectors are stored locally and replicated
//! to the `k` peers whose data they resemble most, ranked by a kernel density
//! estimate over recent distance quanta.
//!
//! Modules:
//! - [`model`]: vectors, synopses, per-node state, running moments.
//! - [`pbdist`]: Poisson-binomial tail machinery behind vote confidences.
//! - [`detectors`]: the three per-dataset outlier indicators.
//! - [`ensemble`]: indicator matrix and double majority voting.
//! - [`placement`]: distance quanta, KDE similarity, top-k target selection.
//! - [`simulator`]: deterministic event loop and experiment metrics.
//! - [`ingest`]: CSV trace loading, synthetic streams, outlier injection.
//! - [`config`]: run parameters and validation.

pub mod config;
pub mod detectors;
pub mod ensemble;
pub mod error;
pub mod ingest;
pub mod model;
pub mod pbdist;
pub mod placement;
pub mod simulator;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
