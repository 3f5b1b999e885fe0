use std::collections::BTreeSet;

use chrono::NaiveDate;

use super::TimeSeries;
use crate::error::{Error, Result};

/// Column-labelled, date-indexed matrix with an observed mask.
///
/// Values are stored row-major. Cells whose mask entry is `false` hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    ids: Vec<String>,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl DataMatrix {
    pub fn new(
        ids: Vec<String>,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        let cells = ids.len() * dates.len();
        if values.len() != cells || mask.len() != cells {
            return Err(Error::InvalidArgument(format!(
                "matrix of {} x {} needs {cells} cells, got {} values and {} mask entries",
                dates.len(),
                ids.len(),
                values.len(),
                mask.len()
            )));
        }
        let mut m = Self {
            ids,
            dates,
            values,
            mask,
        };
        for (v, &obs) in m.values.iter_mut().zip(&m.mask) {
            if !obs {
                *v = f64::NAN;
            }
        }
        for j in 0..m.n_cols() {
            let observed = (0..m.n_rows()).filter(|&i| m.is_observed(i, j)).count();
            if observed < 2 {
                return Err(Error::TooShort {
                    id: m.ids[j].clone(),
                    needed: 2,
                    got: observed,
                });
            }
        }
        Ok(m)
    }

    /// Aligns series on the union of their dates; absent dates become missing cells.
    pub fn from_series(series: &[TimeSeries]) -> Result<Self> {
        let dates: Vec<NaiveDate> = series
            .iter()
            .flat_map(|s| s.dates().iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n_cols = series.len();
        let mut values = vec![f64::NAN; dates.len() * n_cols];
        let mut mask = vec![false; dates.len() * n_cols];
        for (j, s) in series.iter().enumerate() {
            let mut row = 0;
            for (date, v) in s.dates().iter().zip(s.values()) {
                while dates[row] < *date {
                    row += 1;
                }
                if let Some(v) = v {
                    values[row * n_cols + j] = *v;
                    mask[row * n_cols + j] = true;
                }
            }
        }
        let ids = series.iter().map(|s| s.id().to_string()).collect();
        Self::new(ids, dates, values, mask)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.ids.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let k = row * self.n_cols() + col;
        self.mask[k].then_some(self.values[k])
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.n_cols() + col]
    }

    pub fn missing_count(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count()
    }

    pub fn column(&self, col: usize) -> Result<TimeSeries> {
        let values = (0..self.n_rows()).map(|i| self.get(i, col)).collect();
        TimeSeries::new(self.ids[col].clone(), self.dates.clone(), values)
    }

    pub fn columns(&self) -> Result<Vec<TimeSeries>> {
        (0..self.n_cols()).map(|j| self.column(j)).collect()
    }

    pub(crate) fn with_cells(&self, values: Vec<f64>, mask: Vec<bool>) -> Self {
        Self {
            ids: self.ids.clone(),
            dates: self.dates.clone(),
            values,
            mask,
        }
    }
}
