use chrono::Duration;

use super::ensemble::BoostedEnsemble;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Forecasts `horizon` daily steps past the end of `history`.
///
/// Each prediction is appended to the working history before the next
/// step's features are built. Values are in the units of `history`.
pub fn recursive_forecast(
    model: &BoostedEnsemble,
    history: &TimeSeries,
    horizon: usize,
) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let spec = model.feature_spec.as_ref().ok_or_else(|| {
        Error::InvalidArgument("model carries no feature spec to forecast with".into())
    })?;
    if spec.width() != model.width() {
        return Err(Error::InvalidArgument(format!(
            "feature spec width {} does not match model width {}",
            spec.width(),
            model.width()
        )));
    }
    let raw = history.complete_values("forecasting")?;
    let needed = spec.history_needed();
    if raw.len() < needed {
        return Err(Error::TooShort {
            id: history.id().to_string(),
            needed,
            got: raw.len(),
        });
    }
    let mut working: Vec<f64> = match &model.normalization {
        Some(p) => raw.iter().map(|&v| p.apply(v)).collect(),
        None => raw,
    };
    let mut date = history.last_date();
    let mut row = Vec::with_capacity(spec.width());
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        date += Duration::days(1);
        row.clear();
        spec.push_row(&working, working.len(), date, &mut row);
        let next = model.predict_row(&row)?;
        if !next.is_finite() {
            return Err(Error::NonFinite {
                context: "recursive forecast".into(),
            });
        }
        working.push(next);
        out.push(match &model.normalization {
            Some(p) => p.invert(next),
            None => next,
        });
    }
    Ok(out)
}
