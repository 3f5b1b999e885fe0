//! Prediction intervals from empirical holdout-residual quantiles.
//!
//! Offsets are additive and may be asymmetric. An inflation factor `κ ≥ 1`
//! widens both offsets to absorb the gap between a proxy and the quantity it
//! stands in for.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_INFLATION: f64 = 1.25;
pub const MIN_RESIDUALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualOffsets {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalForecast {
    /// 1-based horizon index.
    pub step: usize,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub inflation: f64,
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "interval level must lie in (0, 1), got {level}"
        )))
    }
}

/// Quantile of ascending `sorted` at probability `p`, interpolating linearly
/// between order statistics at position `(n - 1) * p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0 && (0.0..=1.0).contains(&p));
    let pos = (n - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Central `level` quantile offsets of the residuals `actual - predicted`.
pub fn residual_quantiles(
    actual: &[f64],
    predicted: &[f64],
    level: f64,
) -> Result<ResidualOffsets> {
    check_level(level)?;
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.len() < MIN_RESIDUALS {
        return Err(Error::InvalidArgument(format!(
            "interval calibration needs at least {MIN_RESIDUALS} residuals, got {}",
            actual.len()
        )));
    }
    let mut residuals: Vec<f64> = actual.iter().zip(predicted).map(|(a, p)| a - p).collect();
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite {
            context: "forecast residuals".into(),
        });
    }
    residuals.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let low = quantile_sorted(&residuals, tail);
    let high = quantile_sorted(&residuals, 1.0 - tail);
    debug_assert!(low <= high);
    Ok(ResidualOffsets { low, high })
}

/// Applies inflated offsets to each point forecast.
pub fn build_intervals(
    points: &[f64],
    offsets: ResidualOffsets,
    inflation: f64,
    level: f64,
) -> Result<Vec<IntervalForecast>> {
    check_level(level)?;
    if !(inflation >= 1.0 && inflation.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "inflation must be a finite number >= 1, got {inflation}"
        )));
    }
    if offsets.low > offsets.high {
        return Err(Error::InvalidArgument(format!(
            "low offset {} exceeds high offset {}",
            offsets.low, offsets.high
        )));
    }
    let straddles = offsets.low <= 0.0 && offsets.high >= 0.0;
    points
        .iter()
        .enumerate()
        .map(|(i, &point)| {
            if !point.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("point forecast at step {}", i + 1),
                });
            }
            let lower = point + inflation * offsets.low;
            let upper = point + inflation * offsets.high;
            assert!(lower <= upper, "interval bounds crossed at step {}", i + 1);
            if straddles {
                assert!(
                    lower <= point && point <= upper,
                    "point outside its interval at step {}",
                    i + 1
                );
            }
            Ok(IntervalForecast {
                step: i + 1,
                point,
                lower,
                upper,
                level,
                inflation,
            })
        })
        .collect()
}

/// `Adjusted_CI_Lower_95%`-style column labels for a level.
pub fn bound_headers(level: f64) -> (String, String) {
    let pct = format_percent(level);
    (
        format!("Adjusted_CI_Lower_{pct}%"),
        format!("Adjusted_CI_Upper_{pct}%"),
    )
}

fn format_percent(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}

/// Forecast table with one row per step, headed like
/// `step,Predicted_<proxy>,Adjusted_CI_Lower_95%,Adjusted_CI_Upper_95%`.
pub fn interval_table_csv(proxy: &str, rows: &[IntervalForecast], level: f64) -> String {
    let (lower, upper) = bound_headers(level);
    let mut out = format!("step,Predicted_{proxy},{lower},{upper}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4}\n",
            r.step, r.point, r.lower, r.upper
        ));
    }
    out
}
