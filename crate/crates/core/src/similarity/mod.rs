//! Distance kernels for comparing annualized series.
//!
//! Every kernel takes plain slices. Lower values always mean "more similar";
//! [`lcss_distance`] turns the LCSS length into such a distance.

mod elastic;
mod geometric;
mod warping;

pub use elastic::{edr, lcs_length, lcss_distance};
pub use geometric::{embed_as_trajectory, euclidean, hausdorff, PointSet2D};
pub use warping::{dtw, soft_dtw};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty sequence of finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sequence(Vec<f64>);

impl Sequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("sequence must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "sequence".into(),
            });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Sequence {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Sequence> for Vec<f64> {
    fn from(s: Sequence) -> Self {
        s.0
    }
}

impl AsRef<[f64]> for Sequence {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityConfig {
    /// Match threshold for LCSS (`<=`) and EDR (`<`).
    pub epsilon: f64,
    /// Soft-DTW smoothing.
    pub gamma: f64,
    /// Sakoe-Chiba half-width for DTW and Soft-DTW; `None` is the full matrix.
    pub band: Option<usize>,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            gamma: 1.0,
            band: None,
        }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be a non-negative number, got {}",
                self.epsilon
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// The measures a candidate can be ranked under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SoftDtw,
    Dtw,
    Lcss,
    Edr,
    Hausdorff,
    Euclidean,
}

impl Method {
    /// The five measures of the standard ranking table, in column order.
    pub const STANDARD: [Method; 5] = [
        Method::SoftDtw,
        Method::Dtw,
        Method::Lcss,
        Method::Edr,
        Method::Hausdorff,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::SoftDtw => "soft_dtw",
            Method::Dtw => "dtw",
            Method::Lcss => "lcss",
            Method::Edr => "edr",
            Method::Hausdorff => "hausdorff",
            Method::Euclidean => "euclidean",
        }
    }

    /// Column header used in ranking tables.
    pub fn title(self) -> &'static str {
        match self {
            Method::SoftDtw => "Soft-DTW Distance",
            Method::Dtw => "DTW Distance",
            Method::Lcss => "LCSS",
            Method::Edr => "edr",
            Method::Hausdorff => "hausdorff",
            Method::Euclidean => "euclidean",
        }
    }

    /// Whether the measure is guaranteed non-negative.
    pub fn is_nonnegative(self) -> bool {
        !matches!(self, Method::SoftDtw)
    }

    pub fn distance(self, x: &[f64], y: &[f64], config: &SimilarityConfig) -> Result<f64> {
        match self {
            Method::SoftDtw => soft_dtw(x, y, config),
            Method::Dtw => dtw(x, y, config),
            Method::Lcss => lcss_distance(x, y, config.epsilon),
            Method::Edr => Ok(edr(x, y, config.epsilon) as f64),
            Method::Hausdorff => hausdorff(&embed_as_trajectory(x)?, &embed_as_trajectory(y)?),
            Method::Euclidean => euclidean(x, y),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        let method = match key.as_str() {
            "soft_dtw" | "softdtw" | "soft_dtw_distance" => Method::SoftDtw,
            "dtw" | "dtw_distance" => Method::Dtw,
            "lcss" | "lcs" => Method::Lcss,
            "edr" => Method::Edr,
            "hausdorff" => Method::Hausdorff,
            "euclidean" => Method::Euclidean,
            _ => return Err(Error::UnknownMethod(s.to_string())),
        };
        Ok(method)
    }
}
