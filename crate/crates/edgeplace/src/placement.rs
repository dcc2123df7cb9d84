//! Replica target selection: distance quanta against peer synopses, a
//! streaming Gaussian kernel density over each peer's recent quanta, and the
//! exceedance probability gamma that ranks peers by similarity.

use std::collections::BTreeMap;

use statrs::function::erf::erf;

use crate::config::RankOrder;
use crate::error::{PipelineError, Result};
use crate::model::{DataVector, NodeId, Synopsis};

/// The last `capacity` distance quanta observed against one peer, oldest
/// first.
#[derive(Debug, Clone)]
pub struct QuantaWindow {
    node_id: NodeId,
    quanta: Vec<f64>,
    capacity: usize,
}

impl QuantaWindow {
    pub fn new(node_id: NodeId, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(PipelineError::config("window", "must be at least 1"));
        }
        Ok(QuantaWindow {
            node_id,
            quanta: Vec::with_capacity(capacity),
            capacity,
        })
    }

    pub fn node_id(&self) -> NodeId {
        self.node_id
    }

    pub fn len(&self) -> usize {
        self.quanta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quanta.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.quanta
    }

    /// Append a quantum, dropping the oldest entry once the window is full.
    pub fn push(&mut self, quantum: f64) -> Result<()> {
        if !(quantum.is_finite() && quantum >= 0.0) {
            return Err(PipelineError::config(
                "quantum",
                format!("distance {quantum} must be finite and non-negative"),
            ));
        }
        if self.quanta.len() == self.capacity {
            self.quanta.remove(0);
        }
        self.quanta.push(quantum);
        Ok(())
    }
}

/// L_p distance between a vector and a synopsis: against the synopsis means,
/// or — when the synopsis carries centroids — against the closest centroid.
pub fn quantum(x: &DataVector, s: &Synopsis, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(PipelineError::config(
            "lp_order",
            "norm order must be at least 1",
        ));
    }
    if x.dims() != s.dims() {
        return Err(PipelineError::DimensionMismatch {
            expected: s.dims(),
            got: x.dims(),
        });
    }
    let lp = |a: &[f64], b: &[f64]| -> f64 {
        let sum: f64 = a
            .iter()
            .zip(b.iter())
            .map(|(&u, &v)| (u - v).abs().powf(p))
            .sum();
        sum.powf(1.0 / p)
    };
    match &s.centroids {
        Some(centroids) if !centroids.is_empty() => {
            let mut best = f64::INFINITY;
            for c in centroids {
                if c.len() != x.dims() {
                    return Err(PipelineError::DimensionMismatch {
                        expected: x.dims(),
                        got: c.len(),
                    });
                }
                best = best.min(lp(&x.values, c));
            }
            Ok(best)
        }
        _ => Ok(lp(&x.values, &s.means)),
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(PipelineError::config("bandwidth", "must be positive"));
    }
    Ok(())
}

fn gaussian_kernel(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Kernel density estimate of the quanta distribution at `g`.
///
/// Evaluated by the streaming recurrence — each stored quantum updates the
/// previous estimate in place: `f_t = ((t-1)/t) f_{t-1} + K((g - q_t)/h)/(t h)`.
/// The fixed point equals the plain average of kernel evaluations over the
/// window, which is the documented contract for this function.
pub fn kde_pdf(window: &QuantaWindow, g: f64, h: f64) -> Result<f64> {
    check_bandwidth(h)?;
    if window.is_empty() {
        return Err(PipelineError::EmptyWindow);
    }
    let mut estimate = 0.0;
    for (i, &q) in window.as_slice().iter().enumerate() {
        let t = (i + 1) as f64;
        estimate = ((t - 1.0) / t) * estimate + gaussian_kernel((g - q) / h) / (t * h);
    }
    Ok(estimate)
}

/// Smoothed empirical CDF of the quanta distribution at `g`: the average of
/// per-quantum Gaussian CDFs with bandwidth `h`.
pub fn kde_cdf(window: &QuantaWindow, g: f64, h: f64) -> Result<f64> {
    check_bandwidth(h)?;
    if window.is_empty() {
        return Err(PipelineError::EmptyWindow);
    }
    let quanta = window.as_slice();
    let sum: f64 = quanta
        .iter()
        .map(|&q| 0.5 * (1.0 + erf((g - q) / (h * std::f64::consts::SQRT_2))))
        .sum();
    Ok((sum / quanta.len() as f64).clamp(0.0, 1.0))
}

/// Probability that the next quantum against this peer exceeds `epsilon`:
/// the complement of the smoothed CDF. Low gamma marks a similar peer.
pub fn gamma(window: &QuantaWindow, epsilon: f64, h: f64) -> Result<f64> {
    Ok((1.0 - kde_cdf(window, epsilon, h)?).clamp(0.0, 1.0))
}

/// Replica targets for one accepted vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementDecision {
    /// Chosen hosts, best-ranked first; at most k entries.
    pub targets: Vec<NodeId>,
    /// The gamma used for each eligible peer.
    pub gammas: BTreeMap<NodeId, f64>,
    /// Number of peers that had a non-empty window this round.
    pub eligible: usize,
}

/// Rank eligible peers by gamma and keep the best `min(k, eligible)`.
///
/// `Ascending` prefers low gamma (most similar); ties always break toward the
/// lower node id so the outcome is independent of map iteration order.
pub fn select_targets(
    gammas: &BTreeMap<NodeId, f64>,
    k: usize,
    order: RankOrder,
) -> Result<PlacementDecision> {
    if k == 0 {
        return Err(PipelineError::config("top_k", "must be at least 1"));
    }
    for (&node, &g) in gammas {
        if !(g.is_finite() && (0.0..=1.0).contains(&g)) {
            return Err(PipelineError::config(
                "gammas",
                format!("gamma {g} for {node} lies outside [0, 1]"),
            ));
        }
    }
    let mut ranked: Vec<(NodeId, f64)> = gammas.iter().map(|(&n, &g)| (n, g)).collect();
    ranked.sort_by(|a, b| {
        let by_gamma = match order {
            RankOrder::Ascending => a.1.partial_cmp(&b.1),
            RankOrder::Descending => b.1.partial_cmp(&a.1),
        }
        .expect("gammas validated finite");
        by_gamma.then(a.0.cmp(&b.0))
    });
    let take = k.min(ranked.len());
    Ok(PlacementDecision {
        targets: ranked[..take].iter().map(|&(n, _)| n).collect(),
        gammas: gammas.clone(),
        eligible: gammas.len(),
    })
}
