use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    /// `None` when the actuals have zero variance.
    pub r2: Option<f64>,
}

pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<Metrics> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidArgument(
            "metrics need at least one value".into(),
        ));
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "metric inputs".into(),
        });
    }
    let n = actual.len() as f64;
    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    let sae: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .sum();
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    let rmse = (sse / n).sqrt();
    // Rounding can put rmse a hair below mae when all errors are equal.
    let mae = (sae / n).min(rmse);
    let r2 = if sst > 0.0 {
        // Any nonzero error keeps r2 strictly below one.
        Some(if sse == 0.0 {
            1.0
        } else {
            (1.0 - sse / sst).min(1.0 - f64::EPSILON)
        })
    } else {
        None
    };
    Ok(Metrics { rmse, mae, r2 })
}
