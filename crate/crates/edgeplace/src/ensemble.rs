//! Two-stage majority voting over the detector-by-dataset indicator grid,
//! with a success-count tail probability as the verdict confidence.

use crate::detectors::IndicatorResult;
use crate::error::{PipelineError, Result};
use crate::pbdist::{majority_floor, pb_tail, BernoulliProfile};

/// The V x N grid of detector outcomes: one column per dataset, one row per
/// detector. Optional per-detector weights feed the fuzzy column vote.
#[derive(Debug, Clone)]
pub struct IndicatorMatrix {
    columns: Vec<Vec<IndicatorResult>>,
    detector_weights: Option<Vec<f64>>,
}

impl IndicatorMatrix {
    /// Build a matrix from per-dataset columns (each of length V).
    pub fn from_columns(
        columns: Vec<Vec<IndicatorResult>>,
        detector_weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(PipelineError::TooFew {
                context: "indicator matrix datasets",
                min: 1,
                got: 0,
            });
        }
        let v = columns[0].len();
        if v == 0 {
            return Err(PipelineError::TooFew {
                context: "indicator matrix detectors",
                min: 1,
                got: 0,
            });
        }
        if columns.iter().any(|c| c.len() != v) {
            return Err(PipelineError::config(
                "cells",
                "columns disagree on detector count",
            ));
        }
        if let Some(w) = &detector_weights {
            if w.len() != v {
                return Err(PipelineError::config(
                    "detector_weights",
                    format!("{} weights for {v} detectors", w.len()),
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
        Ok(IndicatorMatrix {
            columns,
            detector_weights,
        })
    }

    /// Number of detectors (rows).
    pub fn detectors(&self) -> usize {
        self.columns[0].len()
    }

    /// Number of datasets (columns).
    pub fn datasets(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[IndicatorResult] {
        &self.columns[j]
    }

    pub fn detector_weights(&self) -> Option<&[f64]> {
        self.detector_weights.as_deref()
    }
}

/// Outcome of the two-stage vote for one incoming vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierVerdict {
    /// Final decision: reject to cloud when true.
    pub is_outlier: bool,
    /// Stage-one outcome per dataset.
    pub per_dataset: Vec<bool>,
    /// Tail probability that at least the majority of datasets vote outlier,
    /// under the per-dataset aggregated confidences.
    pub confidence: f64,
    /// Number of datasets voting outlier.
    pub votes: usize,
}

/// Stage one: does one dataset's detector column vote "outlier"?
///
/// Unweighted (weights = None): true iff at least `delta` detectors flagged,
/// with `delta` in [1, V]. Weighted: true iff the flag-weight sum reaches
/// `delta`, with `delta` in (0, sum of weights].
pub fn column_vote(
    column: &[IndicatorResult],
    delta: f64,
    weights: Option<&[f64]>,
) -> Result<bool> {
    let v = column.len();
    if v == 0 {
        return Err(PipelineError::TooFew {
            context: "column vote detectors",
            min: 1,
            got: 0,
        });
    }
    match weights {
        None => {
            if !(delta >= 1.0 && delta <= v as f64) {
                return Err(PipelineError::config(
                    "delta",
                    format!("must lie in 1..={v} for an unweighted vote"),
                ));
            }
            let count = column.iter().filter(|r| r.flagged).count();
            Ok(count as f64 >= delta)
        }
        Some(w) => {
            if w.len() != v {
                return Err(PipelineError::config(
                    "detector_weights",
                    format!("{} weights for {v} detectors", w.len()),
                ));
            }
            let total: f64 = w.iter().sum();
            if !(delta > 0.0 && delta <= total) {
                return Err(PipelineError::config(
                    "delta",
                    format!("must lie in (0, {total}] for the given weights"),
                ));
            }
            let sum: f64 = column
                .iter()
                .zip(w.iter())
                .filter(|(r, _)| r.flagged)
                .map(|(_, &wi)| wi)
                .sum();
            Ok(sum >= delta)
        }
    }
}

/// Average detector confidence of one column: the default bridge from a
/// column of per-detector confidences to a single per-dataset probability.
pub fn column_probability_mean(column: &[IndicatorResult]) -> f64 {
    let sum: f64 = column.iter().map(|r| r.confidence).sum();
    (sum / column.len() as f64).clamp(0.0, 1.0)
}

/// Stage two over stage one: vote each dataset column, then require at least
/// `delta_prime` dataset votes for the final outlier verdict.
pub fn double_majority(
    matrix: &IndicatorMatrix,
    delta: f64,
    delta_prime: usize,
) -> Result<OutlierVerdict> {
    let n = matrix.datasets();
    if delta_prime == 0 || delta_prime > n {
        return Err(PipelineError::config(
            "delta_prime",
            format!("must lie in 1..={n} for {n} datasets"),
        ));
    }
    let mut per_dataset = Vec::with_capacity(n);
    for j in 0..n {
        per_dataset.push(column_vote(
            matrix.column(j),
            delta,
            matrix.detector_weights(),
        )?);
    }
    let votes = per_dataset.iter().filter(|&&b| b).count();
    let confidence = verdict_confidence(matrix, delta_prime)?;
    Ok(OutlierVerdict {
        is_outlier: votes >= delta_prime,
        per_dataset,
        confidence,
        votes,
    })
}

/// Probability that at least `max(delta_prime, majority floor)` datasets
/// vote outlier, treating each dataset's aggregated confidence as an
/// independent success probability.
pub fn verdict_confidence(matrix: &IndicatorMatrix, delta_prime: usize) -> Result<f64> {
    verdict_confidence_with(matrix, delta_prime, column_probability_mean)
}

/// As [`verdict_confidence`], with a caller-supplied column aggregator.
pub fn verdict_confidence_with<F>(
    matrix: &IndicatorMatrix,
    delta_prime: usize,
    aggregate: F,
) -> Result<f64>
where
    F: Fn(&[IndicatorResult]) -> f64,
{
    let n = matrix.datasets();
    if delta_prime == 0 || delta_prime > n {
        return Err(PipelineError::config(
            "delta_prime",
            format!("must lie in 1..={n} for {n} datasets"),
        ));
    }
    let probs: Vec<f64> = (0..n).map(|j| aggregate(matrix.column(j))).collect();
    let profile = BernoulliProfile::new(probs)?;
    let z = delta_prime.max(majority_floor(n)?);
    pb_tail(&profile, z)
}
