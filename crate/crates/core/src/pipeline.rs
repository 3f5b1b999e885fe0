//! The forecasting stage end to end: features, chronological split, grid
//! search, fit, holdout metrics, recursive forecast and intervals.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbt::{
    build_features, chrono_split, compute_metrics, fit_boosted_ensemble, grid_search,
    recursive_forecast, BoostedEnsemble, FeatureSpec, HyperGrid, Metrics, SearchResult,
};
use crate::intervals::{build_intervals, residual_quantiles, IntervalForecast, ResidualOffsets};
use crate::series::{NormalizationParams, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastOptions {
    pub features: FeatureSpec,
    pub train_fraction: f64,
    pub grid: HyperGrid,
    pub folds: usize,
    pub seed: u64,
    pub horizon: usize,
    pub level: f64,
    pub inflation: f64,
    /// Standardize with training-period statistics before featurizing.
    pub normalize: bool,
}

impl Default for ForecastOptions {
    fn default() -> Self {
        Self {
            features: FeatureSpec::default(),
            train_fraction: 0.8,
            grid: HyperGrid::default(),
            folds: 3,
            seed: 42,
            horizon: 15,
            level: 0.95,
            inflation: crate::intervals::DEFAULT_INFLATION,
            normalize: true,
        }
    }
}

impl ForecastOptions {
    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        let grid = self.grid.expand();
        if grid.is_empty() {
            return Err(Error::InvalidArgument(
                "hyperparameter grid is empty".into(),
            ));
        }
        for hp in &grid {
            hp.validate()?;
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument("folds must be at least 2".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if !(self.inflation >= 1.0 && self.inflation.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "inflation must be >= 1, got {}",
                self.inflation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastOutcome {
    pub series_id: String,
    pub model: BoostedEnsemble,
    pub search: SearchResult,
    pub train_metrics: Metrics,
    pub test_metrics: Metrics,
    pub test_dates: Vec<NaiveDate>,
    pub test_actual: Vec<f64>,
    pub test_predicted: Vec<f64>,
    pub offsets: ResidualOffsets,
    pub forecast_dates: Vec<NaiveDate>,
    pub intervals: Vec<IntervalForecast>,
}

/// Fits on the training split only and forecasts past the end of `series`.
pub fn forecast_series(series: &TimeSeries, opts: &ForecastOptions) -> Result<ForecastOutcome> {
    opts.validate()?;
    let raw = series.complete_values("forecasting")?;
    let spec = &opts.features;
    let needed = spec.min_series_len();
    if raw.len() < needed {
        return Err(Error::TooShort {
            id: series.id().to_string(),
            needed,
            got: raw.len(),
        });
    }
    let offset = spec.history_needed();
    let rows = raw.len() - offset;
    let cut = (opts.train_fraction * rows as f64).ceil() as usize;

    let params = if opts.normalize {
        NormalizationParams::fit(series.id(), &raw[..offset + cut.min(rows)])?
    } else {
        NormalizationParams::IDENTITY
    };
    let scaled = TimeSeries::new(
        series.id(),
        series.dates().to_vec(),
        raw.iter().map(|&v| Some(params.apply(v))).collect(),
    )?;
    let frame = build_features(&scaled, spec)?;
    let (train, test) = chrono_split(&frame, opts.train_fraction)?;

    let search = grid_search(&train, &opts.grid.expand(), opts.folds, opts.seed)?;
    log::info!(
        "{}: best of {} configs is rounds={} depth={} eta={} (cv rmse {:.6})",
        series.id(),
        search.scores.len(),
        search.best.rounds,
        search.best.max_depth,
        search.best.learning_rate,
        search.scores[search.best_index].mean_rmse
    );
    let model = fit_boosted_ensemble(&train, &search.best, opts.seed)?
        .with_feature_spec(spec.clone())
        .with_normalization(params);

    let unscale = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| params.invert(x)).collect() };
    let train_pred = unscale(model.predict_frame(&train)?);
    let train_actual = unscale(train.targets.clone());
    let test_predicted = unscale(model.predict_frame(&test)?);
    let test_actual = unscale(test.targets.clone());
    let train_metrics = compute_metrics(&train_actual, &train_pred)?;
    let test_metrics = compute_metrics(&test_actual, &test_predicted)?;

    let offsets = residual_quantiles(&test_actual, &test_predicted, opts.level)?;
    let points = recursive_forecast(&model, series, opts.horizon)?;
    let intervals = build_intervals(&points, offsets, opts.inflation, opts.level)?;
    let last = series.last_date();
    let forecast_dates = (1..=opts.horizon as i64)
        .map(|h| last + Duration::days(h))
        .collect();

    Ok(ForecastOutcome {
        series_id: series.id().to_string(),
        model,
        search,
        train_metrics,
        test_metrics,
        test_dates: test.dates.clone(),
        test_actual,
        test_predicted,
        offsets,
        forecast_dates,
        intervals,
    })
}
