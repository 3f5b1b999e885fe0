//! Gradient-boosted regression trees for one-step-ahead forecasting.
//!
//! Squared-error boosting with second-order leaf weights, L1/L2 leaf
//! regularization and gain-based pruning. Trees are grown depth-first with
//! exact greedy split search on presorted columns. Missing feature values
//! follow a per-split default direction learned during training.

mod ensemble;
mod features;
mod forecast;
mod metrics;
mod search;
mod tree;

pub use ensemble::{fit_boosted_ensemble, BoostedEnsemble, TrainingTrace};
pub use features::{build_features, chrono_split, FeatureSpec, SupervisedFrame};
pub use forecast::recursive_forecast;
pub use metrics::{compute_metrics, Metrics};
pub use search::{grid_search, rolling_origin_folds, ConfigScore, HyperGrid, SearchResult};
pub use tree::{Node, RegressionTree};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// L1 penalty on leaf weights.
    pub alpha: f64,
    /// Minimum gain a split must exceed.
    pub gamma: f64,
    pub min_child_weight: f64,
    /// Starting prediction; the training-target mean when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_score: Option<f64>,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            lambda: 1.0,
            alpha: 0.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            base_score: None,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("hyperparameter {what}")));
        if self.rounds == 0 {
            return bad("rounds must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("min_child_weight", self.min_child_weight),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be a non-negative number"));
            }
        }
        if let Some(b) = self.base_score {
            if !b.is_finite() {
                return bad("base_score must be finite");
            }
        }
        Ok(())
    }
}

/// `sign(g) * max(|g| - alpha, 0)`.
pub(crate) fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

/// Optimal leaf weight for gradient sum `g` and hessian sum `h`.
pub fn leaf_weight(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let denom = h + lambda;
    if denom <= 0.0 {
        return 0.0;
    }
    -soft_threshold(g, alpha) / denom
}

/// Structure score of a node, `T_alpha(G)^2 / (H + lambda)`.
pub(crate) fn node_score(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let denom = h + lambda;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = soft_threshold(g, alpha);
    t * t / denom
}
