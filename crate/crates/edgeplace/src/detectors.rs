//! The three per-dataset outlier indicators: likelihood, z-score, chi-square.
//!
//! Each detector maps an incoming vector and one dataset synopsis to a binary
//! flag plus a confidence in [0, 1], calibrated so that the flag boundary sits
//! at one half (a flagged result always carries confidence >= 0.5). Degenerate
//! synopses (fewer than two samples, or a zero-spread dimension) make every
//! detector abstain: unflagged at confidence 0.5, so cold-start datasets
//! neither attract nor repel verdicts.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{PipelineError, Result};
use crate::model::{DataVector, Synopsis};

/// Number of detectors in the shipped bank.
pub const DETECTOR_COUNT: usize = 3;

/// Which detector produced an indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorId {
    Likelihood,
    ZScore,
    ChiSquare,
}

/// One detector's view of one (vector, dataset) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorResult {
    pub flagged: bool,
    pub confidence: f64,
    pub detector_id: DetectorId,
}

impl IndicatorResult {
    fn abstain(detector_id: DetectorId) -> Self {
        IndicatorResult {
            flagged: false,
            confidence: 0.5,
            detector_id,
        }
    }
}

fn check_dims(x: &DataVector, s: &Synopsis) -> Result<()> {
    if x.dims() != s.dims() {
        return Err(PipelineError::DimensionMismatch {
            expected: s.dims(),
            got: x.dims(),
        });
    }
    Ok(())
}

fn ln_gaussian_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * z * z - (std * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

/// Flag when the per-dimension geometric-mean Gaussian density of the vector
/// under the synopsis falls below `threshold`.
///
/// The underlying score is the product of per-dimension densities; using its
/// M-th root keeps one threshold meaningful across dimensionalities.
/// Confidence is `1 - (density / threshold) / 2`, clamped to [0, 1]: zero
/// density maps to 1, the flag boundary to 0.5, and twice the threshold to 0.
pub fn likelihood_indicator(
    x: &DataVector,
    s: &Synopsis,
    threshold: f64,
) -> Result<IndicatorResult> {
    check_dims(x, s)?;
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(PipelineError::config(
            "likelihood_threshold",
            "must be positive",
        ));
    }
    if !s.usable_for_detection() {
        return Ok(IndicatorResult::abstain(DetectorId::Likelihood));
    }
    let ln_sum: f64 = x
        .values
        .iter()
        .zip(s.means.iter().zip(s.stds.iter()))
        .map(|(&v, (&m, &sd))| ln_gaussian_pdf(v, m, sd))
        .sum();
    let geo_mean_density = (ln_sum / x.dims() as f64).exp();
    let ratio = geo_mean_density / threshold;
    Ok(IndicatorResult {
        flagged: geo_mean_density < threshold,
        confidence: (1.0 - ratio / 2.0).clamp(0.0, 1.0),
        detector_id: DetectorId::Likelihood,
    })
}

/// A convex combination of per-dataset Gaussian product densities.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    weights: Vec<f64>,
    components: Vec<Synopsis>,
}

impl MixtureModel {
    /// Build a mixture; weights must be positive and sum to 1.
    pub fn new(weights: Vec<f64>, components: Vec<Synopsis>) -> Result<Self> {
        if components.is_empty() {
            return Err(PipelineError::TooFew {
                context: "mixture components",
                min: 1,
                got: 0,
            });
        }
        if weights.len() != components.len() {
            return Err(PipelineError::config(
                "weights",
                format!(
                    "{} weights for {} components",
                    weights.len(),
                    components.len()
                ),
            ));
        }
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(PipelineError::config(
                "weights",
                "every weight must be positive",
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(PipelineError::config(
                "weights",
                format!("weights sum to {total}, expected 1"),
            ));
        }
        let dims = components[0].dims();
        if components.iter().any(|c| c.dims() != dims) {
            return Err(PipelineError::config(
                "components",
                "components disagree on dimensionality",
            ));
        }
        Ok(MixtureModel {
            weights,
            components,
        })
    }

    /// Equal-weight mixture over the given components.
    pub fn uniform(components: Vec<Synopsis>) -> Result<Self> {
        let n = components.len().max(1);
        MixtureModel::new(vec![1.0 / n as f64; components.len()], components)
    }
}

/// Density of `x` under the mixture: the weighted sum of per-component
/// products of per-dimension Gaussian densities.
///
/// A zero-spread dimension makes its component a point mass there: the
/// component contributes nothing unless the vector matches that coordinate
/// exactly, in which case the degenerate dimension is skipped.
pub fn mixture_pdf(model: &MixtureModel, x: &DataVector) -> Result<f64> {
    let dims = model.components[0].dims();
    if x.dims() != dims {
        return Err(PipelineError::DimensionMismatch {
            expected: dims,
            got: x.dims(),
        });
    }
    let mut total = 0.0;
    for (w, comp) in model.weights.iter().zip(model.components.iter()) {
        let mut ln_density = 0.0;
        let mut matched = true;
        for ((&v, &m), &sd) in x.values.iter().zip(comp.means.iter()).zip(comp.stds.iter()) {
            if sd == 0.0 {
                if v != m {
                    matched = false;
                    break;
                }
            } else {
                ln_density += ln_gaussian_pdf(v, m, sd);
            }
        }
        if matched {
            total += w * ln_density.exp();
        }
    }
    Ok(total)
}

/// Flag when at least half the dimensions deviate more than three standard
/// deviations from the synopsis mean.
///
/// Confidence is the exceeding-dimension count remapped piecewise-linearly so
/// the majority boundary lands on 0.5 and all-dimensions lands on 1.
pub fn zscore_indicator(x: &DataVector, s: &Synopsis) -> Result<IndicatorResult> {
    check_dims(x, s)?;
    if !s.usable_for_detection() {
        return Ok(IndicatorResult::abstain(DetectorId::ZScore));
    }
    let m = x.dims();
    let exceeding = x
        .values
        .iter()
        .zip(s.means.iter().zip(s.stds.iter()))
        .filter(|(&v, (&mean, &sd))| (v - mean).abs() > 3.0 * sd)
        .count();
    let need = m.div_ceil(2);
    let confidence = if exceeding < need {
        0.5 * exceeding as f64 / need as f64
    } else if m == need {
        1.0
    } else {
        0.5 + 0.5 * (exceeding - need) as f64 / (m - need) as f64
    };
    Ok(IndicatorResult {
        flagged: exceeding >= need,
        confidence,
        detector_id: DetectorId::ZScore,
    })
}

/// Squared standardized residual sum of `x` against the synopsis.
fn chi_statistic(x: &DataVector, s: &Synopsis) -> f64 {
    x.values
        .iter()
        .zip(s.means.iter().zip(s.stds.iter()))
        .map(|(&v, (&m, &sd))| {
            let z = (v - m) / sd;
            z * z
        })
        .sum()
}

fn chi_square_with(
    x: &DataVector,
    s: &Synopsis,
    dist: &ChiSquared,
    critical: f64,
) -> Result<IndicatorResult> {
    check_dims(x, s)?;
    if !s.usable_for_detection() {
        return Ok(IndicatorResult::abstain(DetectorId::ChiSquare));
    }
    let t = chi_statistic(x, s);
    Ok(IndicatorResult {
        flagged: t > critical,
        confidence: dist.cdf(t),
        detector_id: DetectorId::ChiSquare,
    })
}

/// Flag when the squared standardized residual sum exceeds the chi-square
/// quantile with M degrees of freedom at level `1 - alpha`.
/// Confidence is the chi-square CDF of the statistic.
pub fn chi_square_indicator(x: &DataVector, s: &Synopsis, alpha: f64) -> Result<IndicatorResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PipelineError::config("chi_alpha", "must lie in (0, 1)"));
    }
    let dist = ChiSquared::new(x.dims() as f64)
        .map_err(|e| PipelineError::config("dims", e.to_string()))?;
    let critical = dist.inverse_cdf(1.0 - alpha);
    chi_square_with(x, s, &dist, critical)
}

/// The full detector bank with per-run constants (chi-square critical value)
/// resolved once.
#[derive(Debug, Clone)]
pub struct DetectorBank {
    likelihood_threshold: f64,
    chi_dist: ChiSquared,
    chi_critical: f64,
}

impl DetectorBank {
    pub fn new(dims: usize, likelihood_threshold: f64, chi_alpha: f64) -> Result<Self> {
        if dims == 0 {
            return Err(PipelineError::config("dims", "must be at least 1"));
        }
        if !(likelihood_threshold.is_finite() && likelihood_threshold > 0.0) {
            return Err(PipelineError::config(
                "likelihood_threshold",
                "must be positive",
            ));
        }
        if !(chi_alpha > 0.0 && chi_alpha < 1.0) {
            return Err(PipelineError::config("chi_alpha", "must lie in (0, 1)"));
        }
        let chi_dist = ChiSquared::new(dims as f64)
            .map_err(|e| PipelineError::config("dims", e.to_string()))?;
        let chi_critical = chi_dist.inverse_cdf(1.0 - chi_alpha);
        Ok(DetectorBank {
            likelihood_threshold,
            chi_dist,
            chi_critical,
        })
    }

    /// Run all detectors on one (vector, synopsis) pair.
    /// Order: likelihood, z-score, chi-square.
    pub fn evaluate(
        &self,
        x: &DataVector,
        s: &Synopsis,
    ) -> Result<[IndicatorResult; DETECTOR_COUNT]> {
        Ok([
            likelihood_indicator(x, s, self.likelihood_threshold)?,
            zscore_indicator(x, s)?,
            chi_square_with(x, s, &self.chi_dist, self.chi_critical)?,
        ])
    }
}
