//! Daily proxies for annually reported indicators.
//!
//! The crate covers the whole path from raw daily candidate series to a
//! multi-step forecast of the selected proxy:
//!
//! * [`series`] holds the dated series types, standardization, annual
//!   aggregation and autoencoder gap imputation.
//! * [`similarity`] implements the elastic and geometric distance kernels
//!   (DTW, Soft-DTW, LCSS, EDR, Hausdorff, plus Euclidean).
//! * [`proxy`] ranks annualized candidates against the annual target under
//!   each measure and aggregates the rankings into a consensus winner.
//! * [`gbt`] is a regularized gradient-boosted tree regressor with lag
//!   features, rolling-origin grid search and recursive forecasting.
//! * [`intervals`] turns holdout residuals into inflated prediction intervals.
//! * [`pipeline`] chains feature building, search, fitting and intervals for
//!   one series.
//! * [`ingest`] reads CSV inputs and fetches OHLCV data from a JSON chart
//!   endpoint through an on-disk cache.
//! * [`fixture`] generates the deterministic synthetic dataset used by the
//!   end-to-end tests and the bundled example configuration.

pub mod error;
pub mod fixture;
pub mod gbt;
pub mod ingest;
pub mod intervals;
pub mod pipeline;
pub mod proxy;
pub mod series;
pub mod similarity;

pub use error::{Error, ErrorKind, Result};
