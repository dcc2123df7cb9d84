//! Shared domain types: vectors, synopses, per-node state and streaming moments.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{PipelineError, Result};
use crate::placement::QuantaWindow;

/// Identifier of a node in the group. Ordering is used for deterministic tie-breaks.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// An M-dimensional observation arriving at a node.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector {
    pub values: Vec<f64>,
    pub source_node: NodeId,
    pub sequence_id: u64,
}

impl DataVector {
    /// Build a vector, rejecting empty or non-finite payloads.
    pub fn new(values: Vec<f64>, source_node: NodeId, sequence_id: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(PipelineError::config(
                "values",
                "vector must have at least one dimension",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PipelineError::config(
                "values",
                "vector contains NaN or infinite entries",
            ));
        }
        Ok(DataVector {
            values,
            source_node,
            sequence_id,
        })
    }

    pub fn dims(&self) -> usize {
        self.values.len()
    }
}

/// Per-dataset statistical summary broadcast at epochs: per-dimension mean and
/// population standard deviation, plus optional cluster centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct Synopsis {
    pub node_id: NodeId,
    pub epoch: u64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub count: u64,
    pub centroids: Option<Vec<Vec<f64>>>,
}

impl Synopsis {
    pub fn dims(&self) -> usize {
        self.means.len()
    }

    /// An empty-dataset synopsis carries no information at all.
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Whether detectors can evaluate against this synopsis. Cold-start
    /// synopses (fewer than two samples, or a degenerate dimension) make the
    /// detectors abstain instead.
    pub fn usable_for_detection(&self) -> bool {
        self.count >= 2 && self.stds.iter().all(|&s| s > 0.0)
    }
}

/// Streaming per-dimension count/mean/M2 accumulators (Welford update).
#[derive(Debug, Clone, PartialEq)]
pub struct RunningMoments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningMoments {
    pub fn new(dims: usize) -> Self {
        RunningMoments {
            count: 0,
            mean: vec![0.0; dims],
            m2: vec![0.0; dims],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    pub fn push(&mut self, values: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for (j, &x) in values.iter().enumerate() {
            let delta = x - self.mean[j];
            self.mean[j] += delta / n;
            self.m2[j] += delta * (x - self.mean[j]);
        }
    }

    /// Population standard deviation per dimension; zero until two samples exist.
    pub fn stds(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|&m2| (m2 / n).max(0.0).sqrt()).collect()
    }
}

/// Full state of one node: its dataset, streaming moments, and its view of the
/// rest of the group (latest peer synopses and the per-peer quanta windows).
#[derive(Debug, Clone)]
pub struct NodeState {
    pub node_id: NodeId,
    pub dataset: Vec<DataVector>,
    pub running_moments: RunningMoments,
    pub peer_synopses: BTreeMap<NodeId, Synopsis>,
    pub quanta_history: BTreeMap<NodeId, QuantaWindow>,
    last_synopsis_epoch: Option<u64>,
}

impl NodeState {
    pub fn new(node_id: NodeId, dims: usize) -> Self {
        NodeState {
            node_id,
            dataset: Vec::new(),
            running_moments: RunningMoments::new(dims),
            peer_synopses: BTreeMap::new(),
            quanta_history: BTreeMap::new(),
            last_synopsis_epoch: None,
        }
    }

    pub fn dims(&self) -> usize {
        self.running_moments.mean.len()
    }

    /// Store a vector and fold it into the streaming moments.
    pub fn update_moments(&mut self, x: DataVector) -> Result<()> {
        if x.dims() != self.dims() {
            return Err(PipelineError::DimensionMismatch {
                expected: self.dims(),
                got: x.dims(),
            });
        }
        self.running_moments.push(&x.values);
        self.dataset.push(x);
        Ok(())
    }

    /// Snapshot the current moments as a synopsis for the given epoch.
    ///
    /// Epochs must strictly increase per node. An empty dataset yields a
    /// synopsis with `count == 0`, which `usable_for_detection` rejects.
    pub fn make_synopsis(&mut self, epoch: u64) -> Result<Synopsis> {
        if let Some(last) = self.last_synopsis_epoch {
            if epoch <= last {
                return Err(PipelineError::EpochNotMonotone {
                    node: self.node_id.0,
                    last,
                    requested: epoch,
                });
            }
        }
        self.last_synopsis_epoch = Some(epoch);
        Ok(Synopsis {
            node_id: self.node_id,
            epoch,
            means: self.running_moments.means().to_vec(),
            stds: self.running_moments.stds(),
            count: self.running_moments.count(),
            centroids: None,
        })
    }

    /// Replace the stored synopsis for a peer; stale epochs are ignored.
    pub fn receive_synopsis(&mut self, synopsis: Synopsis) {
        match self.peer_synopses.get(&synopsis.node_id) {
            Some(existing) if existing.epoch >= synopsis.epoch => {}
            _ => {
                self.peer_synopses.insert(synopsis.node_id, synopsis);
            }
        }
    }
}
