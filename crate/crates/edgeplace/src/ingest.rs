//! Trace loading, normalization, ground-truth outlier injection, and
//! synthetic stream generation for experiments.

use std::path::Path;

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::model::{DataVector, NodeId};

/// Sensor rows equal to this value mark a failed measurement; such rows are
/// dropped rather than imputed so they cannot distort dataset statistics.
pub const SENTINEL: f64 = -200.0;

/// A trace vector plus its harness-only ground-truth label. The label never
/// reaches pipeline code; it only scores detection after a run.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub vector: DataVector,
    pub is_injected_outlier: bool,
}

/// Wrap a clean trace with all-false labels.
pub fn label_clean(trace: Vec<DataVector>) -> Vec<LabeledVector> {
    trace
        .into_iter()
        .map(|vector| LabeledVector {
            vector,
            is_injected_outlier: false,
        })
        .collect()
}

/// Result of loading a delimited trace file.
#[derive(Debug, Clone)]
pub struct TraceLoad {
    pub vectors: Vec<DataVector>,
    /// Rows dropped for missing fields, sentinel values, or parse failures.
    pub dropped_rows: usize,
    pub total_rows: usize,
}

fn is_sentinel(v: f64) -> bool {
    (v - SENTINEL).abs() < 1e-9
}

/// Load a delimited numeric trace: sniff the delimiter (comma or semicolon)
/// and an optional header row, select the first `dims` fully numeric columns,
/// drop rows with missing or sentinel values, and min-max normalize each
/// selected column to [0, 1] (constant columns normalize to 0).
pub fn load_trace_detailed(path: &Path, dims: usize) -> Result<TraceLoad> {
    if dims == 0 {
        return Err(PipelineError::config("dims", "must be at least 1"));
    }
    let text = std::fs::read_to_string(path)?;
    let first_line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let delimiter = if first_line.matches(';').count() > first_line.matches(',').count() {
        b';'
    } else {
        b','
    };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    // Missing fields (empty, or absent in a short row) drop their row later;
    // text fields disqualify their column from numeric selection.
    #[derive(Clone, Copy, PartialEq)]
    enum Field {
        Missing,
        Text,
        Num(f64),
    }

    let mut rows: Vec<Vec<Field>> = Vec::new();
    let mut width = 0;
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::Trace(e.to_string()))?;
        let parsed: Vec<Field> = record
            .iter()
            .map(|field| {
                let trimmed = field.trim();
                if trimmed.is_empty() {
                    Field::Missing
                } else {
                    match trimmed.parse::<f64>() {
                        Ok(v) if v.is_finite() => Field::Num(v),
                        _ => Field::Text,
                    }
                }
            })
            .collect();
        width = width.max(parsed.len());
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(PipelineError::Trace("trace file contains no rows".into()));
    }
    // A header row has no numeric field at all; drop it before column sniffing.
    if rows[0].iter().all(|f| !matches!(f, Field::Num(_))) {
        rows.remove(0);
    }
    if rows.is_empty() {
        return Err(PipelineError::Trace(
            "trace file contains only a header".into(),
        ));
    }

    let total_rows = rows.len();
    let mut numeric_columns = Vec::new();
    for col in 0..width {
        let mut any_value = false;
        let mut all_numeric = true;
        for row in &rows {
            match row.get(col) {
                Some(Field::Num(_)) => any_value = true,
                Some(Field::Text) => {
                    all_numeric = false;
                    break;
                }
                Some(Field::Missing) | None => {}
            }
        }
        if any_value && all_numeric {
            numeric_columns.push(col);
        }
        if numeric_columns.len() == dims {
            break;
        }
    }
    if numeric_columns.len() < dims {
        return Err(PipelineError::config(
            "dims",
            format!(
                "trace has {} numeric columns, {dims} requested",
                numeric_columns.len()
            ),
        ));
    }

    // Keep rows where every selected column is present and non-sentinel.
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for row in &rows {
        let values: Option<Vec<f64>> = numeric_columns
            .iter()
            .map(|&c| match row.get(c) {
                Some(Field::Num(v)) if !is_sentinel(*v) => Some(*v),
                _ => None,
            })
            .collect();
        if let Some(values) = values {
            kept.push(values);
        }
    }
    let dropped_rows = total_rows - kept.len();
    if kept.is_empty() {
        return Err(PipelineError::Trace(
            "every row was dropped for missing or sentinel values".into(),
        ));
    }

    // Min-max normalize each column over the kept rows.
    let mut mins = vec![f64::INFINITY; dims];
    let mut maxs = vec![f64::NEG_INFINITY; dims];
    for row in &kept {
        for (j, &v) in row.iter().enumerate() {
            mins[j] = mins[j].min(v);
            maxs[j] = maxs[j].max(v);
        }
    }
    let vectors = kept
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let values = row
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    let range = maxs[j] - mins[j];
                    if range > 0.0 {
                        (v - mins[j]) / range
                    } else {
                        0.0
                    }
                })
                .collect();
            DataVector::new(values, NodeId(0), i as u64)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TraceLoad {
        vectors,
        dropped_rows,
        total_rows,
    })
}

/// As [`load_trace_detailed`], returning only the vectors.
pub fn load_trace(path: &Path, dims: usize) -> Result<Vec<DataVector>> {
    Ok(load_trace_detailed(path, dims)?.vectors)
}

/// Plant ground-truth outliers: pick `floor(rate * len)` distinct seeded
/// positions and shift every dimension of each chosen vector by
/// `magnitude * column_std` of the clean trace, each dimension in a seeded
/// random direction. Values are not clipped back into [0, 1] — an outlier is
/// supposed to escape the data envelope.
pub fn inject_outliers(
    trace: &[DataVector],
    rate: f64,
    magnitude: f64,
    seed: u64,
) -> Result<Vec<LabeledVector>> {
    if !(rate.is_finite() && (0.0..=1.0).contains(&rate)) {
        return Err(PipelineError::config("outlier_rate", "must lie in [0, 1]"));
    }
    if !(magnitude.is_finite() && magnitude > 3.0) {
        return Err(PipelineError::config(
            "outlier_magnitude",
            "must exceed 3 so injected outliers stay distinguishable from the local 3-sigma rule",
        ));
    }
    let mut labeled = label_clean(trace.to_vec());
    let count = (rate * trace.len() as f64).floor() as usize;
    if count == 0 {
        return Ok(labeled);
    }

    let dims = trace[0].dims();
    let n = trace.len() as f64;
    let mut means = vec![0.0; dims];
    for v in trace {
        for (j, &x) in v.values.iter().enumerate() {
            means[j] += x / n;
        }
    }
    let mut stds = vec![0.0; dims];
    for v in trace {
        for (j, &x) in v.values.iter().enumerate() {
            stds[j] += (x - means[j]).powi(2) / n;
        }
    }
    for s in stds.iter_mut() {
        *s = s.sqrt();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = rand::seq::index::sample(&mut rng, trace.len(), count).into_vec();
    positions.sort_unstable();
    for pos in positions {
        let entry = &mut labeled[pos];
        entry.is_injected_outlier = true;
        for (j, value) in entry.vector.values.iter_mut().enumerate() {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            *value += sign * magnitude * stds[j];
        }
    }
    Ok(labeled)
}

/// Per-dimension generator for synthetic streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl DistributionSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(PipelineError::config(
                        "specs",
                        "uniform bounds must satisfy lo <= hi",
                    ));
                }
            }
            DistributionSpec::Gaussian { mean, std } => {
                if !(mean.is_finite() && std.is_finite() && std >= 0.0) {
                    return Err(PipelineError::config(
                        "specs",
                        "gaussian std must be non-negative",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Generate a reproducible multivariate stream with one distribution per
/// dimension.
pub fn synth_stream(
    count: usize,
    dims: usize,
    specs: &[DistributionSpec],
    seed: u64,
) -> Result<Vec<DataVector>> {
    if count == 0 {
        return Err(PipelineError::config("count", "must be at least 1"));
    }
    if dims == 0 {
        return Err(PipelineError::config("dims", "must be at least 1"));
    }
    if specs.len() != dims {
        return Err(PipelineError::config(
            "specs",
            format!("{} distribution specs for {dims} dimensions", specs.len()),
        ));
    }
    for spec in specs {
        spec.validate()?;
    }
    let normals: Vec<Option<rand_distr::Normal<f64>>> = specs
        .iter()
        .map(|spec| match *spec {
            DistributionSpec::Gaussian { mean, std } if std > 0.0 => {
                Some(rand_distr::Normal::new(mean, std).expect("validated parameters"))
            }
            _ => None,
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let values = specs
            .iter()
            .zip(normals.iter())
            .map(|(spec, normal)| match *spec {
                DistributionSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
                DistributionSpec::Gaussian { mean, std } => {
                    if std > 0.0 {
                        normal.expect("built for positive std").sample(&mut rng)
                    } else {
                        mean
                    }
                }
            })
            .collect();
        out.push(DataVector::new(values, NodeId(0), i as u64)?);
    }
    Ok(out)
}

/// Fit a trace to `target_dims` dimensions: truncate extra columns, or widen
/// by appending lagged copies of the base columns (column `c` of the output,
/// for `c >= dims`, carries base column `c % dims` from `c / dims` rows back).
/// Lets a low-dimensional physical trace drive higher-dimensional runs.
pub fn fit_dims(trace: &[DataVector], target_dims: usize) -> Result<Vec<DataVector>> {
    if target_dims == 0 {
        return Err(PipelineError::config("dims", "must be at least 1"));
    }
    if trace.is_empty() {
        return Ok(Vec::new());
    }
    let dims = trace[0].dims();
    trace
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let values: Vec<f64> = (0..target_dims)
                .map(|c| {
                    let base = c % dims;
                    let lag = c / dims;
                    trace[i.saturating_sub(lag)].values[base]
                })
                .collect();
            DataVector::new(values, v.source_node, v.sequence_id)
        })
        .collect()
}
