use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Which lagged quantities become features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub lags: Vec<usize>,
    /// Trailing rolling-mean windows, each ending one step before the target.
    pub windows: Vec<usize>,
    pub day_of_week: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            lags: (1..=14).collect(),
            windows: vec![7],
            day_of_week: true,
        }
    }
}

const WEEKDAYS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

impl FeatureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lags.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one lag is required".into(),
            ));
        }
        if self.lags.contains(&0) || self.windows.contains(&0) {
            return Err(Error::InvalidArgument(
                "lags and windows must be positive".into(),
            ));
        }
        if self.lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "lags must be sorted and distinct".into(),
            ));
        }
        Ok(())
    }

    pub fn max_lag(&self) -> usize {
        self.lags.iter().copied().max().unwrap_or(0)
    }

    pub fn max_window(&self) -> usize {
        self.windows.iter().copied().max().unwrap_or(0)
    }

    /// Observations needed before the first target can be featurized.
    pub fn history_needed(&self) -> usize {
        self.max_lag().max(self.max_window())
    }

    /// Shortest series `build_features` accepts.
    pub fn min_series_len(&self) -> usize {
        self.max_lag() + self.max_window() + 1
    }

    pub fn width(&self) -> usize {
        self.lags.len() + self.windows.len() + if self.day_of_week { 7 } else { 0 }
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.lags.iter().map(|l| format!("lag_{l}")).collect();
        names.extend(self.windows.iter().map(|w| format!("rolling_mean_{w}")));
        if self.day_of_week {
            names.extend(WEEKDAYS.iter().map(|d| format!("dow_{d}")));
        }
        names
    }

    /// Appends the features for predicting `values[t]` from `values[..t]`.
    pub(crate) fn push_row(&self, values: &[f64], t: usize, date: NaiveDate, out: &mut Vec<f64>) {
        debug_assert!(t >= self.history_needed());
        out.extend(self.lags.iter().map(|&l| values[t - l]));
        out.extend(
            self.windows
                .iter()
                .map(|&w| values[t - w..t].iter().sum::<f64>() / w as f64),
        );
        if self.day_of_week {
            let dow = date.weekday().num_days_from_monday() as usize;
            out.extend((0..7).map(|d| if d == dow { 1.0 } else { 0.0 }));
        }
    }
}

/// Feature rows (row-major) with their targets and target dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedFrame {
    pub feature_names: Vec<String>,
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
    pub dates: Vec<NaiveDate>,
}

impl SupervisedFrame {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<f64>,
        targets: Vec<f64>,
        dates: Vec<NaiveDate>,
    ) -> Result<Self> {
        let width = feature_names.len();
        if width == 0 || features.len() != width * targets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature cells do not form {} rows of width {width}",
                features.len(),
                targets.len()
            )));
        }
        if dates.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: targets.len(),
            });
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data(
                "frame dates must be strictly increasing".into(),
            ));
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "frame targets".into(),
            });
        }
        Ok(Self {
            feature_names,
            features,
            targets,
            dates,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.features[i * w..(i + 1) * w]
    }

    /// Rows `start..end` as a new frame.
    pub fn slice(&self, start: usize, end: usize) -> SupervisedFrame {
        let w = self.width();
        SupervisedFrame {
            feature_names: self.feature_names.clone(),
            features: self.features[start * w..end * w].to_vec(),
            targets: self.targets[start..end].to_vec(),
            dates: self.dates[start..end].to_vec(),
        }
    }
}

/// Lagged-feature supervision: one row per target with complete history.
pub fn build_features(series: &TimeSeries, spec: &FeatureSpec) -> Result<SupervisedFrame> {
    spec.validate()?;
    let values = series.complete_values("building features")?;
    let needed = spec.min_series_len();
    if values.len() < needed {
        return Err(Error::TooShort {
            id: series.id().to_string(),
            needed,
            got: values.len(),
        });
    }
    let start = spec.history_needed();
    let rows = values.len() - start;
    let mut features = Vec::with_capacity(rows * spec.width());
    for t in start..values.len() {
        spec.push_row(&values, t, series.dates()[t], &mut features);
    }
    SupervisedFrame::new(
        spec.names(),
        features,
        values[start..].to_vec(),
        series.dates()[start..].to_vec(),
    )
}

/// Chronological split: the earliest `ceil(fraction * n)` rows train.
pub fn chrono_split(
    frame: &SupervisedFrame,
    train_fraction: f64,
) -> Result<(SupervisedFrame, SupervisedFrame)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = frame.len();
    let cut = (train_fraction * n as f64).ceil() as usize;
    if cut == 0 || cut >= n {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} of {n} rows leaves one side empty"
        )));
    }
    let train = frame.slice(0, cut);
    let test = frame.slice(cut, n);
    assert!(
        train.dates.last() < test.dates.first(),
        "chronological split leaked future rows into training"
    );
    Ok((train, test))
}
