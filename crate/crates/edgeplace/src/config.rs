//! Pipeline configuration and validation.

use serde::{Deserialize, Serialize};

use crate::detectors::DETECTOR_COUNT;
use crate::error::{PipelineError, Result};

/// How the KDE bandwidth is chosen for a quanta window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthPolicy {
    /// A constant bandwidth, used as-is for every window.
    Fixed(f64),
    /// Data-driven bandwidth `1.06 * std(window) * len^(-1/5)`, never below
    /// `floor` (degenerate windows would otherwise collapse the kernel).
    Silverman { floor: f64 },
}

impl BandwidthPolicy {
    /// Resolve the bandwidth for a concrete set of quanta.
    pub fn resolve(&self, quanta: &[f64]) -> f64 {
        match *self {
            BandwidthPolicy::Fixed(h) => h,
            BandwidthPolicy::Silverman { floor } => {
                let n = quanta.len();
                if n < 2 {
                    return floor;
                }
                let mean = quanta.iter().sum::<f64>() / n as f64;
                let var = quanta.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / n as f64;
                let h = 1.06 * var.sqrt() * (n as f64).powf(-0.2);
                h.max(floor)
            }
        }
    }
}

/// How incoming vectors are assigned to nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalPolicy {
    /// Vector `i` arrives at node `i mod N`.
    RoundRobin,
    /// Arrival node drawn uniformly from the seeded stream RNG.
    SeededUniform,
}

/// Direction of the similarity ranking used for replica target selection.
///
/// `gamma` estimates P(distance > epsilon), so *low* gamma means a similar
/// peer. `Ascending` therefore replicates to the most similar datasets;
/// `Descending` is kept as an explicit switch for the opposite reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOrder {
    Ascending,
    Descending,
}

/// Every knob of the pipeline in one place. Constructed from defaults, a
/// manifest file, or CLI flags; always passed through [`PipelineConfig::validate`]
/// before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Number of nodes N in the group.
    pub nodes: usize,
    /// Dimensionality M of every data vector and synopsis.
    pub dims: usize,
    /// Replication fan-out k (targets per accepted vector).
    pub top_k: usize,
    /// Quanta window length W per peer.
    pub window: usize,
    /// Per-dataset detector-majority threshold (delta). A column votes
    /// "outlier" when the (optionally weighted) sum of detector flags reaches
    /// this value. Must lie in `[1, detector count]`.
    pub delta: f64,
    /// Cross-dataset majority threshold (delta'). `None` uses the strict
    /// majority floor over the datasets that actually voted, which keeps the
    /// gate meaningful while synopses are still spreading.
    pub delta_prime: Option<usize>,
    /// Distance threshold epsilon for the similarity probability gamma.
    pub epsilon: f64,
    /// KDE bandwidth policy.
    pub bandwidth: BandwidthPolicy,
    /// Norm order p for the distance quantum.
    pub lp_order: f64,
    /// Vectors ingested between synopsis broadcasts.
    pub epoch_length: u64,
    /// Seed for every randomized choice in a run.
    pub seed: u64,
    /// Arrival assignment policy.
    pub arrival: ArrivalPolicy,
    /// Similarity ranking direction.
    pub rank_order: RankOrder,
    /// Geometric-mean density below which the likelihood detector flags.
    pub likelihood_threshold: f64,
    /// Significance level for the chi-square detector.
    pub chi_alpha: f64,
    /// Optional per-detector weights for the fuzzy column vote.
    pub detector_weights: Option<Vec<f64>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            nodes: 10,
            dims: 2,
            top_k: 2,
            window: 10,
            delta: 2.0,
            delta_prime: None,
            epsilon: 0.4,
            bandwidth: BandwidthPolicy::Silverman { floor: 0.02 },
            lp_order: 2.0,
            epoch_length: 10,
            seed: 42,
            arrival: ArrivalPolicy::RoundRobin,
            rank_order: RankOrder::Ascending,
            likelihood_threshold: 0.05,
            chi_alpha: 0.01,
            detector_weights: None,
        }
    }
}

impl PipelineConfig {
    /// Check every field against its valid range, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(PipelineError::config("nodes", "must be at least 1"));
        }
        if self.dims == 0 {
            return Err(PipelineError::config("dims", "must be at least 1"));
        }
        if self.nodes > 1 && (self.top_k == 0 || self.top_k > self.nodes - 1) {
            return Err(PipelineError::config(
                "top_k",
                format!(
                    "must lie in 1..={} for {} nodes",
                    self.nodes - 1,
                    self.nodes
                ),
            ));
        }
        if self.window == 0 {
            return Err(PipelineError::config("window", "must be at least 1"));
        }
        if !(self.delta >= 1.0 && self.delta <= DETECTOR_COUNT as f64) {
            return Err(PipelineError::config(
                "delta",
                format!("must lie in 1..={DETECTOR_COUNT} (detector count)"),
            ));
        }
        if let Some(dp) = self.delta_prime {
            if dp == 0 || dp > self.nodes {
                return Err(PipelineError::config(
                    "delta_prime",
                    format!("must lie in 1..={} (node count)", self.nodes),
                ));
            }
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(PipelineError::config(
                "epsilon",
                "must be finite and non-negative",
            ));
        }
        match self.bandwidth {
            BandwidthPolicy::Fixed(h) if !(h.is_finite() && h > 0.0) => {
                return Err(PipelineError::config(
                    "bandwidth",
                    "fixed bandwidth must be positive",
                ));
            }
            BandwidthPolicy::Silverman { floor } if !(floor.is_finite() && floor > 0.0) => {
                return Err(PipelineError::config(
                    "bandwidth",
                    "bandwidth floor must be positive",
                ));
            }
            _ => {}
        }
        if self.lp_order.is_nan() || self.lp_order < 1.0 {
            return Err(PipelineError::config(
                "lp_order",
                "norm order must be at least 1",
            ));
        }
        if self.epoch_length == 0 {
            return Err(PipelineError::config("epoch_length", "must be at least 1"));
        }
        if !(self.likelihood_threshold.is_finite() && self.likelihood_threshold > 0.0) {
            return Err(PipelineError::config(
                "likelihood_threshold",
                "must be positive",
            ));
        }
        if !(self.chi_alpha > 0.0 && self.chi_alpha <= 0.5) {
            return Err(PipelineError::config(
                "chi_alpha",
                "must lie in (0, 0.5] so a flag implies confidence above one half",
            ));
        }
        if let Some(w) = &self.detector_weights {
            if w.len() != DETECTOR_COUNT {
                return Err(PipelineError::config(
                    "detector_weights",
                    format!("must list exactly {DETECTOR_COUNT} weights"),
                ));
            }
            if w.iter()
                .any(|&x| !(x.is_finite() && (0.0..=1.0).contains(&x)))
            {
                return Err(PipelineError::config(
                    "detector_weights",
                    "every weight must lie in [0, 1]",
                ));
            }
        }
        Ok(())
    }
}
