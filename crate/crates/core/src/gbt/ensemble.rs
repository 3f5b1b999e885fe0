use serde::{Deserialize, Serialize};

use super::features::{FeatureSpec, SupervisedFrame};
use super::tree::{grow_tree, ColumnIndex, Node, RegressionTree};
use super::{leaf_weight, HyperParams};
use crate::error::{Error, Result};
use crate::series::NormalizationParams;

/// Per-round diagnostics kept from the last fit. Not serialized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    /// Training rmse before any tree (index 0) and after each round.
    pub rmse: Vec<f64>,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub base_score: f64,
    pub learning_rate: f64,
    pub params: HyperParams,
    pub seed: u64,
    pub feature_spec: Option<FeatureSpec>,
    pub feature_names: Vec<String>,
    /// Maps raw series values into the units the trees were fit in.
    pub normalization: Option<NormalizationParams>,
    pub trees: Vec<RegressionTree>,
    #[serde(skip)]
    pub trace: TrainingTrace,
}

fn rmse(pred: &[f64], target: &[f64]) -> f64 {
    let sse: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    (sse / target.len() as f64).sqrt()
}

/// Fits a squared-error boosted ensemble.
///
/// Tree growth is deterministic; `seed` is stored with the model so a future
/// stochastic option can reproduce a fit.
pub fn fit_boosted_ensemble(
    train: &SupervisedFrame,
    hp: &HyperParams,
    seed: u64,
) -> Result<BoostedEnsemble> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot fit on an empty frame".into(),
        ));
    }
    if train.features.iter().any(|v| v.is_infinite()) {
        return Err(Error::NonFinite {
            context: "training features".into(),
        });
    }
    let y = &train.targets;
    let n = y.len();
    let base = hp
        .base_score
        .unwrap_or_else(|| y.iter().sum::<f64>() / n as f64);
    let index = ColumnIndex::new(&train.features, train.width());
    let hess = vec![1.0; n];
    let mut pred = vec![base; n];
    let mut grad = vec![0.0; n];
    let mut trees = Vec::with_capacity(hp.rounds);
    let mut history = Vec::with_capacity(hp.rounds + 1);
    history.push(rmse(&pred, y));

    for round in 1..=hp.rounds {
        for i in 0..n {
            grad[i] = pred[i] - y[i];
        }
        let (tree, leaf_of) = grow_tree(&index, &grad, &hess, hp);
        for (p, &leaf) in pred.iter_mut().zip(&leaf_of) {
            if let Node::Leaf { weight, .. } = tree.nodes()[leaf] {
                *p += hp.learning_rate * weight;
            }
        }
        let loss = rmse(&pred, y);
        if !loss.is_finite() {
            return Err(Error::Diverged(format!(
                "training rmse became {loss} at round {round}"
            )));
        }
        let prev = history[round - 1];
        if hp.gamma == 0.0 && loss > prev + 1e-12 * (1.0 + prev) {
            return Err(Error::Diverged(format!(
                "training rmse rose from {prev} to {loss} at round {round}"
            )));
        }
        history.push(loss);
        trees.push(tree);
    }

    let model = BoostedEnsemble {
        base_score: base,
        learning_rate: hp.learning_rate,
        params: hp.clone(),
        seed,
        feature_spec: None,
        feature_names: train.feature_names.clone(),
        normalization: None,
        trees,
        trace: TrainingTrace {
            rmse: history,
            predictions: pred,
        },
    };
    model.verify_leaves()?;
    Ok(model)
}

impl BoostedEnsemble {
    /// A model with no trees.
    pub fn constant(base_score: f64, width: usize) -> Self {
        Self {
            base_score,
            learning_rate: 1.0,
            params: HyperParams::default(),
            seed: 0,
            feature_spec: None,
            feature_names: (0..width).map(|i| format!("f{i}")).collect(),
            normalization: None,
            trees: Vec::new(),
            trace: TrainingTrace::default(),
        }
    }

    pub fn with_feature_spec(mut self, spec: FeatureSpec) -> Self {
        self.feature_spec = Some(spec);
        self
    }

    pub fn with_normalization(mut self, params: NormalizationParams) -> Self {
        self.normalization = Some(params);
        self
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.width() {
            return Err(Error::InvalidArgument(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.width()
            )));
        }
        let mut acc = self.base_score;
        for tree in &self.trees {
            acc += self.learning_rate * tree.predict_row(row);
        }
        Ok(acc)
    }

    /// Predicts row-major `rows` of the training width.
    pub fn predict(&self, rows: &[f64], width: usize) -> Result<Vec<f64>> {
        if width != self.width() || (width > 0 && !rows.len().is_multiple_of(width)) {
            return Err(Error::InvalidArgument(format!(
                "rows of width {width} do not match model width {}",
                self.width()
            )));
        }
        rows.chunks(width).map(|r| self.predict_row(r)).collect()
    }

    pub fn predict_frame(&self, frame: &SupervisedFrame) -> Result<Vec<f64>> {
        self.predict(&frame.features, frame.width())
    }

    /// Checks each leaf weight against the closed form of its stored sums.
    pub fn verify_leaves(&self) -> Result<()> {
        let HyperParams { lambda, alpha, .. } = self.params;
        for (t, tree) in self.trees.iter().enumerate() {
            for node in tree.nodes() {
                if let Node::Leaf {
                    weight,
                    grad_sum,
                    hess_sum,
                } = *node
                {
                    let expected = leaf_weight(grad_sum, hess_sum, lambda, alpha);
                    if weight != expected {
                        return Err(Error::Data(format!(
                            "tree {t} has leaf weight {weight}, closed form gives {expected}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reloads a serialized model and checks it is usable.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: BoostedEnsemble = serde_json::from_str(text)
            .map_err(|e| Error::Data(format!("invalid model document: {e}")))?;
        if let Some(max) = model.trees.iter().filter_map(|t| t.max_feature()).max() {
            if max >= model.width() {
                return Err(Error::Data(format!(
                    "model splits on feature {max} but has width {}",
                    model.width()
                )));
            }
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}
