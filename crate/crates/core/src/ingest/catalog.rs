use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::OhlcvField;
use crate::series::TimeSeries;
use crate::{Error, Result};

/// Instruments whose fields appear in the reference ranking table.
pub const REFERENCE_INSTRUMENTS: [&str; 7] = [
    "Brent",
    "WTI",
    "WTI_Oil_ETF",
    "RBOB_Gasoline",
    "Energy_Sector_ETF",
    "Heating_Oil",
    "Oil_Services_ETF",
];

/// The (instrument, field) pairs that make up the candidate pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateCatalog {
    entries: Vec<(String, OhlcvField)>,
}

impl Default for CandidateCatalog {
    /// Every field of every reference instrument.
    fn default() -> Self {
        Self::for_instruments(&REFERENCE_INSTRUMENTS).expect("reference ids are unique")
    }
}

impl CandidateCatalog {
    pub fn new(entries: Vec<(String, OhlcvField)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (instrument, field) in &entries {
            if instrument.trim().is_empty() {
                return Err(Error::InvalidArgument(
                    "catalog instrument id is empty".into(),
                ));
            }
            let id = field.series_id(instrument);
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "catalog lists `{id}` twice"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// All six fields of each instrument.
    pub fn for_instruments(instruments: &[&str]) -> Result<Self> {
        Self::new(
            instruments
                .iter()
                .flat_map(|i| OhlcvField::ALL.map(|f| (i.to_string(), f)))
                .collect(),
        )
    }

    /// Parses ids such as `Volume_Brent` or `Adj_Close_WTI_Oil_ETF`.
    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        let entries = ids
            .iter()
            .map(|id| {
                let id = id.as_ref();
                // Longest label first so `Adj_Close_x` is not read as `Close`.
                let mut fields = OhlcvField::ALL;
                fields.sort_by_key(|f| std::cmp::Reverse(f.label().len()));
                fields
                    .iter()
                    .find_map(|f| {
                        id.strip_prefix(f.label())
                            .and_then(|rest| rest.strip_prefix('_'))
                            .map(|inst| (inst.to_string(), *f))
                    })
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "`{id}` is not of the form <Field>_<Instrument>"
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(String, OhlcvField)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Candidate ids in catalog order.
    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|(i, f)| f.series_id(i)).collect()
    }

    /// Distinct instruments in first-appearance order.
    pub fn instruments(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.entries
            .iter()
            .map(|(i, _)| i.as_str())
            .filter(|i| seen.insert(*i))
            .collect()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.iter().any(|(i, f)| f.series_id(i) == id)
    }

    /// Keeps the series whose ids are listed, warning about listed ids that
    /// were not loaded.
    pub fn select(&self, series: Vec<TimeSeries>) -> Vec<TimeSeries> {
        let loaded: BTreeSet<String> = series.iter().map(|s| s.id().to_string()).collect();
        for id in self.ids() {
            if !loaded.contains(&id) {
                log::warn!("catalog entry `{id}` was not found in any source");
            }
        }
        series
            .into_iter()
            .filter(|s| self.contains(s.id()))
            .collect()
    }
}
