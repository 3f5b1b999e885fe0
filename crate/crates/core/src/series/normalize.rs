use serde::{Deserialize, Serialize};

use super::{AnnualSeries, TimeSeries};
use crate::error::{Error, Result};

/// Mean and population standard deviation recorded by a z-normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub mean: f64,
    pub std: f64,
}

impl NormalizationParams {
    pub const IDENTITY: Self = Self {
        mean: 0.0,
        std: 1.0,
    };

    /// Fits on the given values. Errors on fewer than two values or zero variance.
    pub fn fit(id: &str, values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                id: id.to_string(),
                needed: 2,
                got: values.len(),
            });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if !std.is_finite() || !mean.is_finite() {
            return Err(Error::NonFinite {
                context: format!("normalization of `{id}`"),
            });
        }
        // Relative threshold: a spread at rounding level is treated as constant.
        if std <= f64::EPSILON * mean.abs() || std == 0.0 {
            return Err(Error::ZeroVariance {
                id: id.to_string(),
                value: values[0],
            });
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, value: f64) -> f64 {
        (value - self.mean) / self.std
    }

    pub fn invert(&self, value: f64) -> f64 {
        value * self.std + self.mean
    }
}

/// Standardizes the observed values of a series; missing entries stay missing.
pub fn z_normalize(series: &TimeSeries) -> Result<(TimeSeries, NormalizationParams)> {
    let observed: Vec<f64> = series.values().iter().flatten().copied().collect();
    let params = NormalizationParams::fit(series.id(), &observed)?;
    let values = series
        .values()
        .iter()
        .map(|v| v.map(|x| params.apply(x)))
        .collect();
    let out = TimeSeries::new(series.id(), series.dates().to_vec(), values)?;
    Ok((out, params))
}

pub fn z_normalize_annual(series: &AnnualSeries) -> Result<(AnnualSeries, NormalizationParams)> {
    let params = NormalizationParams::fit(series.id(), series.values())?;
    let values = series.values().iter().map(|&v| params.apply(v)).collect();
    Ok((series.with_values(values), params))
}
