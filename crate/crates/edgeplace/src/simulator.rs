//! Deterministic single-threaded event loop over a group of nodes: gate each
//! arriving vector through the detector ensemble, replicate accepted vectors
//! to their most similar peers, exchange synopses at fixed epochs, and score
//! the run.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ArrivalPolicy, PipelineConfig};
use crate::detectors::DetectorBank;
use crate::ensemble::{double_majority, IndicatorMatrix, OutlierVerdict};
use crate::error::{PipelineError, Result};
use crate::ingest::LabeledVector;
use crate::model::{DataVector, NodeId, NodeState, Synopsis};
use crate::pbdist::majority_floor;
use crate::placement::{gamma, quantum, select_targets, PlacementDecision, QuantaWindow};

/// Where one ingested vector ended up.
#[derive(Debug, Clone, PartialEq)]
pub enum RoutingOutcome {
    /// The ensemble called it an outlier; it is not stored in the group.
    RejectedToCloud(OutlierVerdict),
    /// Stored at the arrival node and delivered to the selected peers.
    StoredAndReplicated(PlacementDecision),
    /// Stored at the arrival node only (no peer synopses yet).
    StoredLocalOnly,
}

/// Final first/second moments and size of one node's dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub node_id: NodeId,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub size: u64,
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// Fraction of injected outliers rejected to cloud.
    pub omega: f64,
    /// True when the trace carried no injected outliers and omega defaulted
    /// to 1.
    pub omega_vacuous: bool,
    /// Mean over non-empty datasets of the fraction of stored vectors that
    /// violate the three-sigma rule against their dataset's final moments.
    pub tau: f64,
    pub per_dataset_stats: Vec<DatasetStats>,
    /// One message per replica delivery.
    pub replication_messages: u64,
    /// One message per synopsis delivery at epoch ticks.
    pub synopsis_messages: u64,
    /// What full broadcast would have cost: accepted vectors times (N - 1).
    pub baseline_messages: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub injected_total: u64,
    pub injected_caught: u64,
    pub vectors_total: u64,
    /// Mean over non-empty datasets of the per-dimension std average.
    pub mean_sigma: f64,
    /// Wall-clock seconds per ingested vector (non-deterministic).
    pub wall_time_per_vector: f64,
    /// Ingested vectors per wall-clock second (non-deterministic).
    pub vectors_per_sec: f64,
}

/// The node group plus run counters. Drive it with [`Simulation::ingest_at`]
/// and [`Simulation::epoch_tick`], or run a whole trace through
/// [`run_experiment`].
#[derive(Debug)]
pub struct Simulation {
    config: PipelineConfig,
    bank: DetectorBank,
    nodes: Vec<NodeState>,
    epoch: u64,
    replication_messages: u64,
    synopsis_messages: u64,
    accepted: u64,
    rejected: u64,
}

impl Simulation {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let bank = DetectorBank::new(config.dims, config.likelihood_threshold, config.chi_alpha)?;
        let nodes = (0..config.nodes)
            .map(|i| NodeState::new(NodeId(i), config.dims))
            .collect();
        Ok(Simulation {
            config,
            bank,
            nodes,
            epoch: 0,
            replication_messages: 0,
            synopsis_messages: 0,
            accepted: 0,
            rejected: 0,
        })
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn replication_messages(&self) -> u64 {
        self.replication_messages
    }

    pub fn synopsis_messages(&self) -> u64 {
        self.synopsis_messages
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    /// Run the ensemble gate for a vector arriving at `node`. Returns `None`
    /// when no peer synopsis is usable yet (the gate abstains entirely).
    ///
    /// When fewer datasets have usable synopses than a configured fixed
    /// threshold, the threshold falls back to a majority of those present;
    /// the adaptive default is always the majority floor of the voters.
    fn gate(&self, node: usize, x: &DataVector) -> Result<Option<OutlierVerdict>> {
        let usable: Vec<&Synopsis> = self.nodes[node]
            .peer_synopses
            .values()
            .filter(|s| s.usable_for_detection())
            .collect();
        if usable.is_empty() {
            return Ok(None);
        }
        let mut columns = Vec::with_capacity(usable.len());
        for synopsis in &usable {
            columns.push(self.bank.evaluate(x, synopsis)?.to_vec());
        }
        let matrix = IndicatorMatrix::from_columns(columns, self.config.detector_weights.clone())?;
        let voters = usable.len();
        let delta_prime = match self.config.delta_prime {
            Some(fixed) => fixed.min(voters),
            None => majority_floor(voters)?,
        };
        double_majority(&matrix, self.config.delta, delta_prime).map(Some)
    }

    /// Ingest one vector at `node`: gate it, and if accepted store it
    /// locally, refresh the per-peer quanta windows, and replicate it to the
    /// top-k most similar peers.
    pub fn ingest_at(&mut self, node: usize, x: DataVector) -> Result<RoutingOutcome> {
        if node >= self.nodes.len() {
            return Err(PipelineError::config(
                "node",
                format!(
                    "arrival node {node} out of range for {} nodes",
                    self.nodes.len()
                ),
            ));
        }
        if x.dims() != self.config.dims {
            return Err(PipelineError::DimensionMismatch {
                expected: self.config.dims,
                got: x.dims(),
            });
        }

        if let Some(verdict) = self.gate(node, &x)? {
            if verdict.is_outlier {
                self.rejected += 1;
                return Ok(RoutingOutcome::RejectedToCloud(verdict));
            }
        }
        self.accepted += 1;

        // Distance quanta against every known peer synopsis, then gamma per
        // peer from its refreshed window.
        let state = &mut self.nodes[node];
        let quanta: Vec<(NodeId, f64)> = state
            .peer_synopses
            .values()
            .map(|s| quantum(&x, s, self.config.lp_order).map(|q| (s.node_id, q)))
            .collect::<Result<_>>()?;
        let mut gammas = BTreeMap::new();
        for (peer, q) in quanta {
            let window = match state.quanta_history.get_mut(&peer) {
                Some(w) => w,
                None => {
                    let w = QuantaWindow::new(peer, self.config.window)?;
                    state.quanta_history.entry(peer).or_insert(w)
                }
            };
            window.push(q)?;
            let h = self.config.bandwidth.resolve(window.as_slice());
            gammas.insert(peer, gamma(window, self.config.epsilon, h)?);
        }
        state.update_moments(x.clone())?;

        if gammas.is_empty() {
            return Ok(RoutingOutcome::StoredLocalOnly);
        }
        let decision = select_targets(&gammas, self.config.top_k, self.config.rank_order)?;
        for target in &decision.targets {
            self.nodes[target.0].update_moments(x.clone())?;
        }
        self.replication_messages += decision.targets.len() as u64;
        Ok(RoutingOutcome::StoredAndReplicated(decision))
    }

    /// Broadcast a fresh synopsis from every node with data to all its peers.
    /// Returns the number of synopsis messages this tick produced.
    pub fn epoch_tick(&mut self) -> Result<u64> {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut outgoing = Vec::new();
        for state in &mut self.nodes {
            if state.running_moments.count() > 0 {
                outgoing.push(state.make_synopsis(epoch)?);
            }
        }
        let peers = self.nodes.len() as u64 - 1;
        for synopsis in &outgoing {
            for node in &mut self.nodes {
                if node.node_id != synopsis.node_id {
                    node.receive_synopsis(synopsis.clone());
                }
            }
        }
        let messages = outgoing.len() as u64 * peers;
        self.synopsis_messages += messages;
        Ok(messages)
    }

    fn dataset_stats(&self) -> Vec<DatasetStats> {
        self.nodes
            .iter()
            .map(|n| DatasetStats {
                node_id: n.node_id,
                means: n.running_moments.means().to_vec(),
                stds: n.running_moments.stds(),
                size: n.running_moments.count(),
            })
            .collect()
    }

    /// Fraction of stored vectors violating the three-sigma rule in at least
    /// one dimension, per non-empty dataset.
    fn local_outlier_fractions(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter(|n| !n.dataset.is_empty())
            .map(|n| {
                let means = n.running_moments.means();
                let stds = n.running_moments.stds();
                let violations = n
                    .dataset
                    .iter()
                    .filter(|v| {
                        v.values
                            .iter()
                            .zip(means.iter().zip(stds.iter()))
                            .any(|(&x, (&m, &s))| (x - m).abs() > 3.0 * s)
                    })
                    .count();
                violations as f64 / n.dataset.len() as f64
            })
            .collect()
    }
}

/// Feed a labeled trace through a fresh simulation: seeded arrival
/// assignment, an epoch tick every `epoch_length` arrivals, and a full
/// metrics report at the end.
pub fn run_experiment(
    config: &PipelineConfig,
    trace: &[LabeledVector],
) -> Result<ExperimentReport> {
    if trace.is_empty() {
        return Err(PipelineError::config(
            "trace",
            "must contain at least one vector",
        ));
    }
    for lv in trace {
        if lv.vector.dims() != config.dims {
            return Err(PipelineError::config(
                "trace",
                format!(
                    "trace vectors have {} dimensions, config expects {}",
                    lv.vector.dims(),
                    config.dims
                ),
            ));
        }
    }
    let mut sim = Simulation::new(config.clone())?;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut injected_total = 0u64;
    let mut injected_caught = 0u64;

    let started = Instant::now();
    for (i, lv) in trace.iter().enumerate() {
        let node = match config.arrival {
            ArrivalPolicy::RoundRobin => i % config.nodes,
            ArrivalPolicy::SeededUniform => arrival_rng.gen_range(0..config.nodes),
        };
        let mut x = lv.vector.clone();
        x.source_node = NodeId(node);
        x.sequence_id = i as u64;
        let outcome = sim.ingest_at(node, x)?;
        if lv.is_injected_outlier {
            injected_total += 1;
            if matches!(outcome, RoutingOutcome::RejectedToCloud(_)) {
                injected_caught += 1;
            }
        }
        if (i as u64 + 1).is_multiple_of(config.epoch_length) {
            sim.epoch_tick()?;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();

    let omega_vacuous = injected_total == 0;
    let omega = if omega_vacuous {
        1.0
    } else {
        injected_caught as f64 / injected_total as f64
    };
    let fractions = sim.local_outlier_fractions();
    let tau = if fractions.is_empty() {
        0.0
    } else {
        fractions.iter().sum::<f64>() / fractions.len() as f64
    };
    let per_dataset_stats = sim.dataset_stats();
    let sigma_means: Vec<f64> = per_dataset_stats
        .iter()
        .filter(|s| s.size > 0)
        .map(|s| s.stds.iter().sum::<f64>() / s.stds.len() as f64)
        .collect();
    let mean_sigma = if sigma_means.is_empty() {
        0.0
    } else {
        sigma_means.iter().sum::<f64>() / sigma_means.len() as f64
    };

    let total = trace.len() as u64;
    Ok(ExperimentReport {
        omega,
        omega_vacuous,
        tau,
        per_dataset_stats,
        replication_messages: sim.replication_messages,
        synopsis_messages: sim.synopsis_messages,
        baseline_messages: sim.accepted * (config.nodes as u64 - 1),
        accepted: sim.accepted,
        rejected: sim.rejected,
        injected_total,
        injected_caught,
        vectors_total: total,
        mean_sigma,
        wall_time_per_vector: elapsed / total as f64,
        vectors_per_sec: total as f64 / elapsed.max(f64::MIN_POSITIVE),
    })
}
