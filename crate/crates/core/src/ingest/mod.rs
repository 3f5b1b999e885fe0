//! Loading candidate series and the annual target.
//!
//! Local inputs are CSV files with ISO-8601 dates. Remote OHLCV data comes
//! from a JSON chart endpoint through an on-disk cache (see [`remote`]).

mod catalog;
mod csv_io;
mod ohlcv;
pub mod remote;

pub use catalog::{CandidateCatalog, REFERENCE_INSTRUMENTS};
pub use csv_io::{
    read_csv_series, read_target_index, wide_csv_string, write_wide_csv, CsvSchema, TargetIndex,
};
pub use ohlcv::{ohlcv_to_series, OhlcvField, OhlcvRecord};
pub use remote::{fetch_remote_ohlcv, EndpointConfig, ResponseCache};
