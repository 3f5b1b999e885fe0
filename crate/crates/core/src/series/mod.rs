//! Dated series, standardization, annual aggregation and gap imputation.

mod annual;
mod impute;
mod matrix;
mod normalize;

pub use annual::{annualize, AnnualSeries, MIN_DAYS_PER_YEAR};
pub use impute::{impute_autoencoder, impute_raw, AutoencoderConfig};
pub use matrix::DataMatrix;
pub use normalize::{z_normalize, z_normalize_annual, NormalizationParams};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A daily series with explicit missingness.
///
/// Dates are strictly increasing and at least two values are observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    dates: Vec<NaiveDate>,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    pub fn new(
        id: impl Into<String>,
        dates: Vec<NaiveDate>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        let id = id.into();
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: values.len(),
            });
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "series `{id}`: dates not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("series `{id}`"),
            });
        }
        let observed = values.iter().filter(|v| v.is_some()).count();
        if observed < 2 {
            return Err(Error::TooShort {
                id,
                needed: 2,
                got: observed,
            });
        }
        Ok(Self { id, dates, values })
    }

    /// Builds a fully observed series.
    pub fn from_values(
        id: impl Into<String>,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::new(id, dates, values.into_iter().map(Some).collect())
    }

    /// Fully observed series on consecutive days starting at `start`.
    pub fn daily(id: impl Into<String>, start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        let dates = start.iter_days().take(values.len()).collect();
        Self::from_values(id, dates, values)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn observed_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// The values of a fully observed series.
    pub fn complete_values(&self, operation: &'static str) -> Result<Vec<f64>> {
        self.values
            .iter()
            .map(|v| {
                v.ok_or_else(|| Error::MissingValues {
                    id: self.id.clone(),
                    operation,
                })
            })
            .collect()
    }

    pub fn last_date(&self) -> NaiveDate {
        *self.dates.last().expect("series is never empty")
    }
}
