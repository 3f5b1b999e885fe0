use serde::{Deserialize, Serialize};

use super::{leaf_weight, node_score, HyperParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Where rows with a missing value for `feature` go.
        default_left: bool,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        weight: f64,
        /// Gradient and hessian sums of the training rows in this leaf.
        grad_sum: f64,
        hess_sum: f64,
    },
}

/// A binary regression tree stored as a node arena with the root at index 0.
///
/// A row goes left at a split when its value is `<= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlatTree", try_from = "FlatTree")]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        let tree = Self { nodes };
        tree.check()?;
        Ok(tree)
    }

    /// A single leaf.
    pub fn leaf(weight: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf {
                weight,
                grad_sum: 0.0,
                hess_sum: 0.0,
            }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Index of the leaf that `row` lands in. NaN counts as missing.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    ..
                } => {
                    let x = row[feature];
                    let go_left = if x.is_nan() {
                        default_left
                    } else {
                        x <= threshold
                    };
                    i = if go_left { left } else { right };
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { weight, .. } => weight,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    pub(crate) fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    /// Every node reachable exactly once from the root, children in range.
    fn check(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::Data("tree has no nodes".into()));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if i >= n || seen[i] {
                return Err(Error::Data(format!(
                    "tree node {i} is out of range or shared"
                )));
            }
            seen[i] = true;
            match &self.nodes[i] {
                Node::Split {
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if !threshold.is_finite() {
                        return Err(Error::NonFinite {
                            context: format!("threshold of tree node {i}"),
                        });
                    }
                    stack.push(*right);
                    stack.push(*left);
                }
                Node::Leaf { weight, .. } => {
                    if !weight.is_finite() {
                        return Err(Error::NonFinite {
                            context: format!("weight of tree node {i}"),
                        });
                    }
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Data(format!("tree node {i} is unreachable")));
        }
        Ok(())
    }
}

/// Column-wise view of a training frame with per-feature presorted row order.
pub(crate) struct ColumnIndex {
    n_rows: usize,
    columns: Vec<Vec<f64>>,
    /// Rows with an observed value, ascending by value then row.
    sorted: Vec<Vec<u32>>,
}

impl ColumnIndex {
    pub(crate) fn new(features: &[f64], width: usize) -> Self {
        let n_rows = features.len() / width;
        let columns: Vec<Vec<f64>> = (0..width)
            .map(|f| (0..n_rows).map(|r| features[r * width + f]).collect())
            .collect();
        let sorted = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n_rows as u32)
                    .filter(|&r| !col[r as usize].is_nan())
                    .collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self {
            n_rows,
            columns,
            sorted,
        }
    }
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
    default_left: bool,
}

struct Grower<'a> {
    hp: &'a HyperParams,
    index: &'a ColumnIndex,
    grad: &'a [f64],
    hess: &'a [f64],
    nodes: Vec<Node>,
    /// Leaf node of every training row once growth finishes.
    leaf_of: Vec<usize>,
    go_left: Vec<bool>,
}

/// Grows one tree on the given gradients and reports each row's leaf.
pub(crate) fn grow_tree(
    index: &ColumnIndex,
    grad: &[f64],
    hess: &[f64],
    hp: &HyperParams,
) -> (RegressionTree, Vec<usize>) {
    let n = index.n_rows;
    let mut grower = Grower {
        hp,
        index,
        grad,
        hess,
        nodes: Vec::new(),
        leaf_of: vec![0; n],
        go_left: vec![false; n],
    };
    let rows: Vec<u32> = (0..n as u32).collect();
    grower.grow(rows, index.sorted.clone(), 0);
    let tree = RegressionTree {
        nodes: grower.nodes,
    };
    (tree, grower.leaf_of)
}

impl Grower<'_> {
    fn grow(&mut self, rows: Vec<u32>, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let (g, h) = self.sums(&rows);
        let id = self.nodes.len();
        let split = if depth < self.hp.max_depth {
            self.best_split(&rows, &sorted, g, h)
        } else {
            None
        };
        let Some(split) = split else {
            self.nodes.push(Node::Leaf {
                weight: leaf_weight(g, h, self.hp.lambda, self.hp.alpha),
                grad_sum: g,
                hess_sum: h,
            });
            for &r in &rows {
                self.leaf_of[r as usize] = id;
            }
            return id;
        };

        let col = &self.index.columns[split.feature];
        for &r in &rows {
            let x = col[r as usize];
            self.go_left[r as usize] = if x.is_nan() {
                split.default_left
            } else {
                x <= split.threshold
            };
        }
        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
            rows.iter().partition(|&&r| self.go_left[r as usize]);
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for list in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) =
                list.into_iter().partition(|&r| self.go_left[r as usize]);
            left_sorted.push(l);
            right_sorted.push(r);
        }

        // Reserve the slot so children get higher indices than their parent.
        self.nodes.push(Node::Leaf {
            weight: 0.0,
            grad_sum: g,
            hess_sum: h,
        });
        let left = self.grow(left_rows, left_sorted, depth + 1);
        let right = self.grow(right_rows, right_sorted, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            default_left: split.default_left,
            left,
            right,
            gain: split.gain,
        };
        id
    }

    fn sums(&self, rows: &[u32]) -> (f64, f64) {
        rows.iter().fold((0.0, 0.0), |(g, h), &r| {
            (g + self.grad[r as usize], h + self.hess[r as usize])
        })
    }

    fn best_split(&self, rows: &[u32], sorted: &[Vec<u32>], g: f64, h: f64) -> Option<BestSplit> {
        let HyperParams {
            lambda,
            alpha,
            gamma,
            min_child_weight,
            ..
        } = *self.hp;
        let parent = node_score(g, h, lambda, alpha);
        // Guards against splits whose only gain is rounding noise.
        let floor = 1e-12 * (1.0 + parent);
        let mut best: Option<BestSplit> = None;
        let mut best_gain = floor;

        for (feature, list) in sorted.iter().enumerate() {
            if list.len() < 2 {
                continue;
            }
            let col = &self.index.columns[feature];
            let has_missing = list.len() < rows.len();
            let (gm, hm) = if has_missing {
                let (gn, hn) = self.sums(list);
                (g - gn, h - hn)
            } else {
                (0.0, 0.0)
            };
            let mut gl = 0.0;
            let mut hl = 0.0;
            for pos in 0..list.len() - 1 {
                let r = list[pos] as usize;
                gl += self.grad[r];
                hl += self.hess[r];
                let v = col[r];
                let next = col[list[pos + 1] as usize];
                if v >= next {
                    continue;
                }
                let options: &[bool] = if has_missing {
                    &[false, true]
                } else {
                    &[false]
                };
                for &missing_left in options {
                    let (lg, lh) = if missing_left {
                        (gl + gm, hl + hm)
                    } else {
                        (gl, hl)
                    };
                    let (rg, rh) = (g - lg, h - lh);
                    if lh < min_child_weight || rh < min_child_weight {
                        continue;
                    }
                    let gain = 0.5
                        * (node_score(lg, lh, lambda, alpha) + node_score(rg, rh, lambda, alpha)
                            - parent)
                        - gamma;
                    if gain > best_gain {
                        best_gain = gain;
                        let mid = v + (next - v) / 2.0;
                        best = Some(BestSplit {
                            gain,
                            feature,
                            threshold: if mid < next { mid } else { v },
                            default_left: missing_left,
                        });
                    }
                }
            }
        }
        best
    }
}

/// Serialized form: parallel arrays indexed by node id, `feature = -1` for leaves.
#[derive(Serialize, Deserialize)]
struct FlatTree {
    feature: Vec<i64>,
    threshold: Vec<f64>,
    default_left: Vec<bool>,
    left: Vec<i64>,
    right: Vec<i64>,
    gain: Vec<f64>,
    weight: Vec<f64>,
    grad_sum: Vec<f64>,
    hess_sum: Vec<f64>,
}

impl From<RegressionTree> for FlatTree {
    fn from(tree: RegressionTree) -> Self {
        let n = tree.nodes.len();
        let mut flat = FlatTree {
            feature: Vec::with_capacity(n),
            threshold: Vec::with_capacity(n),
            default_left: Vec::with_capacity(n),
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            gain: Vec::with_capacity(n),
            weight: Vec::with_capacity(n),
            grad_sum: Vec::with_capacity(n),
            hess_sum: Vec::with_capacity(n),
        };
        for node in tree.nodes {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                    gain,
                } => {
                    flat.feature.push(feature as i64);
                    flat.threshold.push(threshold);
                    flat.default_left.push(default_left);
                    flat.left.push(left as i64);
                    flat.right.push(right as i64);
                    flat.gain.push(gain);
                    flat.weight.push(0.0);
                    flat.grad_sum.push(0.0);
                    flat.hess_sum.push(0.0);
                }
                Node::Leaf {
                    weight,
                    grad_sum,
                    hess_sum,
                } => {
                    flat.feature.push(-1);
                    flat.threshold.push(0.0);
                    flat.default_left.push(false);
                    flat.left.push(-1);
                    flat.right.push(-1);
                    flat.gain.push(0.0);
                    flat.weight.push(weight);
                    flat.grad_sum.push(grad_sum);
                    flat.hess_sum.push(hess_sum);
                }
            }
        }
        flat
    }
}

impl TryFrom<FlatTree> for RegressionTree {
    type Error = Error;

    fn try_from(flat: FlatTree) -> Result<Self> {
        let n = flat.feature.len();
        let lens = [
            flat.threshold.len(),
            flat.default_left.len(),
            flat.left.len(),
            flat.right.len(),
            flat.gain.len(),
            flat.weight.len(),
            flat.grad_sum.len(),
            flat.hess_sum.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::Data("tree arrays have unequal lengths".into()));
        }
        let index = |v: i64, what: &str| {
            usize::try_from(v).map_err(|_| Error::Data(format!("negative {what} index {v}")))
        };
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            if flat.feature[i] < 0 {
                nodes.push(Node::Leaf {
                    weight: flat.weight[i],
                    grad_sum: flat.grad_sum[i],
                    hess_sum: flat.hess_sum[i],
                });
            } else {
                nodes.push(Node::Split {
                    feature: flat.feature[i] as usize,
                    threshold: flat.threshold[i],
                    default_left: flat.default_left[i],
                    left: index(flat.left[i], "child")?,
                    right: index(flat.right[i], "child")?,
                    gain: flat.gain[i],
                });
            }
        }
        RegressionTree::new(nodes)
    }
}
