use serde::{Deserialize, Serialize};

use super::block::{restriction_integral, restriction_node_floor, BlockIntegral};
use crate::error::{LabError, Result};
use crate::measures::AtomicMeasure;
use crate::oscillatory::CurveSpec;

/// Least-squares line through `(ln x, ln value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
    /// `(ln x, ln value)`, sorted by `x`.
    pub points: Vec<(f64, f64)>,
}

impl DecayFit {
    /// Ordinary least squares on points already in log space.
    pub fn from_log_points(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(LabError::invalid(format!("need at least 3 points, got {}", points.len())));
        }
        if points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(LabError::invalid("log points must be finite"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(LabError::invalid("abscissae must be distinct"));
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let max_residual = points
            .iter()
            .map(|p| (p.1 - (intercept + slope * p.0)).abs())
            .fold(0.0, f64::max);
        Ok(DecayFit { slope, intercept, max_residual, points })
    }

    /// Fit of `ln value` against `ln x`; every value must be positive.
    pub fn from_values(xs: &[f64], values: &[f64]) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(LabError::invalid("abscissa and value counts differ"));
        }
        let mut pts = Vec::with_capacity(xs.len());
        for (&x, &v) in xs.iter().zip(values) {
            if !(x > 0.0) {
                return Err(LabError::invalid(format!("abscissa {x} must be positive")));
            }
            if !(v > 0.0) {
                return Err(LabError::invalid(format!(
                    "value {v:e} at {x} is not positive; rerun the block with more nodes"
                )));
            }
            pts.push((x.ln(), v.ln()));
        }
        Self::from_log_points(pts)
    }

    /// Refits the stored points.
    pub fn refit(&self) -> Result<Self> {
        Self::from_log_points(self.points.clone())
    }
}

/// Power-law fit of block values against `R`, independent of input order.
pub fn fit_decay(blocks: &[BlockIntegral]) -> Result<DecayFit> {
    let xs: Vec<f64> = blocks.iter().map(|b| b.r).collect();
    let vs: Vec<f64> = blocks.iter().map(|b| b.value).collect();
    DecayFit::from_values(&xs, &vs)
}

/// Restriction integrals along `m t^2 / 2 + m t / 2` for several `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MScan {
    #[serde(rename = "R")]
    pub r: f64,
    pub alpha: f64,
    pub m_values: Vec<f64>,
    pub blocks: Vec<BlockIntegral>,
    /// Fit of `ln value` against `ln m`.
    pub fit: DecayFit,
}

impl MScan {
    /// The exponent `1 - alpha` the fitted slope is compared against.
    pub fn predicted_slope(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// Runs [`restriction_integral`] at fixed `R` for each `m`, with node counts
/// `oversample` times the floor.
pub fn m_dependence_scan(
    measure: &AtomicMeasure,
    alpha: f64,
    r: f64,
    m_values: &[f64],
    oversample: f64,
) -> Result<MScan> {
    if let Some(&bad) = m_values.iter().find(|&&m| !(m >= 1.0)) {
        return Err(LabError::invalid(format!("m = {bad} must be >= 1")));
    }
    if !(oversample >= 1.0) {
        return Err(LabError::invalid("oversample must be >= 1"));
    }
    let mut blocks = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let curve = CurveSpec::m_curve(m)?;
        let n = (restriction_node_floor(measure, &curve, r) as f64 * oversample).ceil() as usize;
        blocks.push(restriction_integral(measure, &curve, r, n)?);
    }
    let values: Vec<f64> = blocks.iter().map(|b| b.value).collect();
    let fit = DecayFit::from_values(m_values, &values)?;
    Ok(MScan { r, alpha, m_values: m_values.to_vec(), blocks, fit })
}
