use std::collections::BTreeMap;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

/// Years with fewer observed days than this are annualized but flagged.
pub const MIN_DAYS_PER_YEAR: usize = 30;

/// Year-indexed values, typically calendar-year means of a daily series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSeries {
    id: String,
    years: Vec<i32>,
    values: Vec<f64>,
    /// Number of daily observations behind each year; empty when the
    /// series was read directly at annual frequency.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    days: Vec<usize>,
}

impl AnnualSeries {
    pub fn new(id: impl Into<String>, years: Vec<i32>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if years.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: years.len(),
                right: values.len(),
            });
        }
        if years.is_empty() {
            return Err(Error::TooShort {
                id,
                needed: 1,
                got: 0,
            });
        }
        if let Some(w) = years.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!(
                "annual series `{id}`: years not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("annual series `{id}`"),
            });
        }
        Ok(Self {
            id,
            years,
            values,
            days: Vec::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn days(&self) -> &[usize] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.years.binary_search(&year).ok().map(|i| self.values[i])
    }

    /// Years backed by fewer than [`MIN_DAYS_PER_YEAR`] daily observations.
    pub fn sparse_years(&self) -> Vec<i32> {
        self.years
            .iter()
            .zip(&self.days)
            .filter(|(_, &d)| d < MIN_DAYS_PER_YEAR)
            .map(|(&y, _)| y)
            .collect()
    }

    /// Keeps only the listed years. Errors if any of them is absent.
    pub fn restrict_to(&self, years: &[i32]) -> Result<Self> {
        let mut values = Vec::with_capacity(years.len());
        let mut days = Vec::new();
        for &y in years {
            let i = self
                .years
                .binary_search(&y)
                .map_err(|_| Error::YearMismatch {
                    id: self.id.clone(),
                    expected: years.to_vec(),
                    got: self.years.clone(),
                })?;
            values.push(self.values[i]);
            if !self.days.is_empty() {
                days.push(self.days[i]);
            }
        }
        Ok(Self {
            id: self.id.clone(),
            years: years.to_vec(),
            values,
            days,
        })
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.years.len());
        Self {
            values,
            ..self.clone()
        }
    }
}

/// Calendar-year means of a fully observed daily series.
pub fn annualize(series: &TimeSeries) -> Result<AnnualSeries> {
    let values = series.complete_values("annualizing")?;
    let mut buckets: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for (date, v) in series.dates().iter().zip(values) {
        let e = buckets.entry(date.year()).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let mut years = Vec::with_capacity(buckets.len());
    let mut means = Vec::with_capacity(buckets.len());
    let mut days = Vec::with_capacity(buckets.len());
    for (year, (sum, count)) in buckets {
        years.push(year);
        means.push(sum / count as f64);
        days.push(count);
    }
    let mut out = AnnualSeries::new(series.id(), years, means)?;
    out.days = days;
    Ok(out)
}
