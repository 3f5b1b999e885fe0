use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// One daily market record; any field may be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OhlcvRecord {
    pub date: NaiveDate,
    pub open: Option<f64>,
    pub high: Option<f64>,
    pub low: Option<f64>,
    pub close: Option<f64>,
    pub adj_close: Option<f64>,
    pub volume: Option<f64>,
}

impl OhlcvRecord {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.open,
            self.high,
            self.low,
            self.close,
            self.adj_close,
            self.volume,
        ];
        if fields.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("OHLCV record of {}", self.date),
            });
        }
        if let (Some(low), Some(high)) = (self.low, self.high) {
            if low > high {
                return Err(Error::Data(format!(
                    "OHLCV record of {}: low {low} exceeds high {high}",
                    self.date
                )));
            }
        }
        if self.volume.is_some_and(|v| v < 0.0) {
            return Err(Error::Data(format!(
                "OHLCV record of {}: negative volume",
                self.date
            )));
        }
        Ok(())
    }

    pub fn get(&self, field: OhlcvField) -> Option<f64> {
        match field {
            OhlcvField::Open => self.open,
            OhlcvField::High => self.high,
            OhlcvField::Low => self.low,
            OhlcvField::Close => self.close,
            OhlcvField::AdjClose => self.adj_close,
            OhlcvField::Volume => self.volume,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OhlcvField {
    Open,
    High,
    Low,
    Close,
    AdjClose,
    Volume,
}

impl OhlcvField {
    pub const ALL: [OhlcvField; 6] = [
        OhlcvField::Open,
        OhlcvField::High,
        OhlcvField::Low,
        OhlcvField::Close,
        OhlcvField::AdjClose,
        OhlcvField::Volume,
    ];

    /// Prefix used in candidate ids, e.g. `Adj_Close` in `Adj_Close_Brent`.
    pub fn label(self) -> &'static str {
        match self {
            OhlcvField::Open => "Open",
            OhlcvField::High => "High",
            OhlcvField::Low => "Low",
            OhlcvField::Close => "Close",
            OhlcvField::AdjClose => "Adj_Close",
            OhlcvField::Volume => "Volume",
        }
    }

    /// Matches a CSV header such as `Adj Close`, `adj_close` or `Volume`.
    pub fn from_header(header: &str) -> Option<Self> {
        let key: String = header
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "open" => Some(OhlcvField::Open),
            "high" => Some(OhlcvField::High),
            "low" => Some(OhlcvField::Low),
            "close" => Some(OhlcvField::Close),
            "adjclose" => Some(OhlcvField::AdjClose),
            "volume" => Some(OhlcvField::Volume),
            _ => None,
        }
    }

    pub fn series_id(self, instrument: &str) -> String {
        format!("{}_{instrument}", self.label())
    }
}

/// Expands records into one series per field, ids `<Field>_<Instrument>`.
///
/// Fields with fewer than two observations are skipped with a warning.
pub fn ohlcv_to_series(instrument: &str, records: &[OhlcvRecord]) -> Result<Vec<TimeSeries>> {
    if records.is_empty() {
        return Err(Error::Data(format!("no OHLCV records for `{instrument}`")));
    }
    let dates: Vec<NaiveDate> = records.iter().map(|r| r.date).collect();
    let mut out = Vec::with_capacity(6);
    for field in OhlcvField::ALL {
        let values: Vec<Option<f64>> = records.iter().map(|r| r.get(field)).collect();
        if values.iter().flatten().count() < 2 {
            log::warn!(
                "skipping {}: fewer than two observations",
                field.series_id(instrument)
            );
            continue;
        }
        out.push(TimeSeries::new(
            field.series_id(instrument),
            dates.clone(),
            values,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(day: u32, low: f64, high: f64, volume: f64) -> OhlcvRecord {
        OhlcvRecord {
            date: NaiveDate::from_ymd_opt(2020, 1, day).unwrap(),
            open: Some(low),
            high: Some(high),
            low: Some(low),
            close: Some(high),
            adj_close: None,
            volume: Some(volume),
        }
    }

    #[test]
    fn validation() {
        assert!(rec(1, 1.0, 2.0, 5.0).validate().is_ok());
        assert!(rec(1, 3.0, 2.0, 5.0).validate().is_err());
        assert!(rec(1, 1.0, 2.0, -5.0).validate().is_err());
    }

    #[test]
    fn headers() {
        assert_eq!(
            OhlcvField::from_header("Adj Close"),
            Some(OhlcvField::AdjClose)
        );
        assert_eq!(
            OhlcvField::from_header("adj_close"),
            Some(OhlcvField::AdjClose)
        );
        assert_eq!(OhlcvField::from_header("VOLUME"), Some(OhlcvField::Volume));
        assert_eq!(OhlcvField::from_header("date"), None);
    }

    #[test]
    fn expansion_skips_empty_fields() {
        let recs = vec![rec(1, 1.0, 2.0, 5.0), rec(2, 1.5, 2.5, 6.0)];
        let series = ohlcv_to_series("Brent", &recs).unwrap();
        let ids: Vec<&str> = series.iter().map(|s| s.id()).collect();
        assert_eq!(
            ids,
            [
                "Open_Brent",
                "High_Brent",
                "Low_Brent",
                "Close_Brent",
                "Volume_Brent"
            ]
        );
    }
}
