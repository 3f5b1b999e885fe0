use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::ensemble::fit_boosted_ensemble;
use super::features::SupervisedFrame;
use super::metrics::compute_metrics;
use super::HyperParams;
use crate::error::{Error, Result};

/// Cartesian hyperparameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperGrid {
    pub rounds: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub min_child_weight: Vec<f64>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            rounds: vec![100, 300],
            max_depth: vec![3, 5],
            learning_rate: vec![0.05, 0.1],
            lambda: vec![1.0],
            alpha: vec![0.0],
            gamma: vec![0.0],
            min_child_weight: vec![1.0],
        }
    }
}

impl HyperGrid {
    /// All combinations, rounds varying slowest.
    pub fn expand(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &rounds in &self.rounds {
            for &max_depth in &self.max_depth {
                for &learning_rate in &self.learning_rate {
                    for &lambda in &self.lambda {
                        for &alpha in &self.alpha {
                            for &gamma in &self.gamma {
                                for &min_child_weight in &self.min_child_weight {
                                    out.push(HyperParams {
                                        rounds,
                                        max_depth,
                                        learning_rate,
                                        lambda,
                                        alpha,
                                        gamma,
                                        min_child_weight,
                                        base_score: None,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub params: HyperParams,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: HyperParams,
    pub best_index: usize,
    pub scores: Vec<ConfigScore>,
}

/// Expanding-window folds over `n` rows split into `folds + 1` blocks.
///
/// Fold `f` trains on the first `f` blocks and validates on block `f + 1`;
/// the last validation block absorbs any remainder rows.
pub fn rolling_origin_folds(n: usize, folds: usize) -> Result<Vec<(Range<usize>, Range<usize>)>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "rolling-origin search needs at least 2 folds, got {folds}"
        )));
    }
    let block = n / (folds + 1);
    if block < 2 {
        return Err(Error::InvalidArgument(format!(
            "{n} rows are too few for {folds} folds (need at least {})",
            2 * (folds + 1)
        )));
    }
    Ok((1..=folds)
        .map(|f| {
            let end = if f == folds { n } else { (f + 1) * block };
            (0..f * block, f * block..end)
        })
        .collect())
}

/// Scores each configuration by mean validation rmse over rolling-origin folds.
///
/// Ties go to fewer rounds, then smaller depth, then the earlier entry.
pub fn grid_search(
    frame: &SupervisedFrame,
    grid: &[HyperParams],
    folds: usize,
    seed: u64,
) -> Result<SearchResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(
            "hyperparameter grid is empty".into(),
        ));
    }
    for hp in grid {
        hp.validate()?;
    }
    let splits = rolling_origin_folds(frame.len(), folds)?;
    let mut scores = Vec::with_capacity(grid.len());
    for hp in grid {
        let mut fold_rmse = Vec::with_capacity(splits.len());
        for (train, valid) in &splits {
            let train = frame.slice(train.start, train.end);
            let valid = frame.slice(valid.start, valid.end);
            let model = fit_boosted_ensemble(&train, hp, seed)?;
            let pred = model.predict_frame(&valid)?;
            fold_rmse.push(compute_metrics(&valid.targets, &pred)?.rmse);
        }
        let mean_rmse = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
        log::debug!(
            "grid: rounds={} depth={} eta={} -> cv rmse {mean_rmse:.6}",
            hp.rounds,
            hp.max_depth,
            hp.learning_rate
        );
        scores.push(ConfigScore {
            params: hp.clone(),
            fold_rmse,
            mean_rmse,
        });
    }
    let best_index = (0..scores.len())
        .min_by(|&a, &b| {
            let (sa, sb) = (&scores[a], &scores[b]);
            sa.mean_rmse
                .total_cmp(&sb.mean_rmse)
                .then(sa.params.rounds.cmp(&sb.params.rounds))
                .then(sa.params.max_depth.cmp(&sb.params.max_depth))
                .then(a.cmp(&b))
        })
        .expect("grid is non-empty");
    Ok(SearchResult {
        best: scores[best_index].params.clone(),
        best_index,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_expand() {
        let folds = rolling_origin_folds(20, 3).unwrap();
        assert_eq!(folds, vec![(0..5, 5..10), (0..10, 10..15), (0..15, 15..20)]);
        let folds = rolling_origin_folds(11, 2).unwrap();
        assert_eq!(folds, vec![(0..3, 3..6), (0..6, 6..11)]);
        assert!(rolling_origin_folds(5, 2).is_err());
        assert!(rolling_origin_folds(100, 1).is_err());
    }

    #[test]
    fn default_grid_size() {
        let grid = HyperGrid::default().expand();
        assert_eq!(grid.len(), 8);
        assert_eq!((grid[0].rounds, grid[0].max_depth), (100, 3));
        assert_eq!(grid[7].rounds, 300);
    }
}
