//! Bagged CART regression forests.
//!
//! Each tree is grown on a bootstrap resample drawn from its own ChaCha
//! stream `(seed, tree index)`, so a forest is identical whether its trees
//! are fitted serially or in parallel. Splits greedily maximize the
//! reduction in the sum of squared deviations over every input variable and
//! every midpoint between consecutive distinct values. Ties go to the lower
//! variable index, then the lower threshold.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::space::StateVector;

use super::{Dataset, ObjectiveModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    /// `None` grows until leaves are pure or hit `min_leaf`.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 100,
            max_depth: Some(8),
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A binary regression tree with axis-aligned splits and mean-valued leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// `(feature, threshold)` of the root split, if any.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }

    /// Every leaf value in node order.
    pub fn leaf_values(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { value } => Some(*value),
                Node::Split { .. } => None,
            })
            .collect()
    }
}

/// Mean of `values`, clamped into their own range so rounding cannot leave it.
fn bounded_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (mut lo, mut hi, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
        n += 1;
    }
    (sum / n as f64).clamp(lo, hi)
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    /// Number of samples (in the sorted order of `feature`) going left.
    left_len: usize,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let value = bounded_mean(idx.iter().map(|&i| self.y[i]));
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    fn best_split(&self, idx: &mut [usize]) -> Option<SplitChoice> {
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        let parent_sse: f64 = idx.iter().map(|&i| (self.y[i] - mean).powi(2)).sum();
        if parent_sse <= 0.0 {
            return None;
        }
        let mut best_gain = parent_sse * 1e-12;
        let mut best: Option<SplitChoice> = None;
        let features = self.x[idx[0]].len();
        for f in 0..features {
            idx.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            // centered prefix sums keep the SSE arithmetic well conditioned
            let (mut sum_l, mut sq_l) = (0.0, 0.0);
            let total: f64 = idx.iter().map(|&i| self.y[i] - mean).sum();
            let total_sq: f64 = idx.iter().map(|&i| (self.y[i] - mean).powi(2)).sum();
            for k in 0..n - 1 {
                let d = self.y[idx[k]] - mean;
                sum_l += d;
                sq_l += d * d;
                let (nl, nr) = (k + 1, n - k - 1);
                let (xa, xb) = (self.x[idx[k]][f], self.x[idx[k + 1]][f]);
                if xa == xb || nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let sum_r = total - sum_l;
                let sq_r = total_sq - sq_l;
                let sse = (sq_l - sum_l * sum_l / nl as f64) + (sq_r - sum_r * sum_r / nr as f64);
                let gain = parent_sse - sse;
                if gain > best_gain {
                    best_gain = gain;
                    best = Some(SplitChoice {
                        feature: f,
                        threshold: 0.5 * (xa + xb),
                        left_len: nl,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        if depth >= self.max_depth || idx.len() < 2 * self.min_leaf.max(1) {
            return self.leaf(idx);
        }
        let Some(split) = self.best_split(idx) else {
            return self.leaf(idx);
        };
        let f = split.feature;
        idx.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: f64::NAN });
        let (l, r) = idx.split_at_mut(split.left_len);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature: f,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

fn fit_tree(
    x: &[Vec<f64>],
    y: &[f64],
    mut idx: Vec<usize>,
    max_depth: usize,
    min_leaf: usize,
) -> RegressionTree {
    let mut b = TreeBuilder {
        x,
        y,
        max_depth,
        min_leaf,
        nodes: Vec::new(),
    };
    b.grow(&mut idx, 0);
    RegressionTree { nodes: b.nodes }
}

/// A bagged ensemble of [`RegressionTree`]s predicting one output column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionForest {
    trees: Vec<RegressionTree>,
    arity: usize,
}

impl RegressionForest {
    pub fn from_trees(trees: Vec<RegressionTree>, arity: usize) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::Config("a forest needs at least one tree".into()));
        }
        Ok(RegressionForest { trees, arity })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Mean of the per-tree leaf values.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: x.len(),
            });
        }
        Ok(bounded_mean(self.trees.iter().map(|t| t.predict(x))))
    }

    pub fn predict_state(&self, state: &StateVector) -> Result<f64> {
        self.predict(state.values())
    }
}

/// Fits a forest to output column `output_index` of `data`.
pub fn fit_forest(
    data: &Dataset,
    output_index: usize,
    params: ForestParams,
    seed: u64,
) -> Result<RegressionForest> {
    if data.is_empty() {
        return Err(Error::Dataset(
            "cannot fit a forest to an empty dataset".into(),
        ));
    }
    if output_index >= data.output_names.len() {
        return Err(Error::Config(format!(
            "output index {output_index} out of range for {} outputs",
            data.output_names.len()
        )));
    }
    if params.trees == 0 || params.min_leaf == 0 || params.max_depth == Some(0) {
        return Err(Error::Config(format!(
            "degenerate forest parameters {params:?}; need trees >= 1, min_leaf >= 1, depth >= 1"
        )));
    }
    let y = data.output_column(output_index);
    let n = data.len();
    let max_depth = params.max_depth.unwrap_or(usize::MAX);
    let trees = (0..params.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed, t as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            fit_tree(&data.inputs, &y, idx, max_depth, params.min_leaf)
        })
        .collect();
    RegressionForest::from_trees(trees, data.input_names.len())
}

/// One forest per output column, exposed as an [`ObjectiveModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    forests: Vec<RegressionForest>,
}

impl ForestModel {
    pub fn fit(data: &Dataset, params: ForestParams, seed: u64) -> Result<Self> {
        let forests = (0..data.output_names.len())
            .map(|j| fit_forest(data, j, params, seed::derive(seed, &format!("forest/{j}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ForestModel { forests })
    }

    pub fn forests(&self) -> &[RegressionForest] {
        &self.forests
    }
}

impl ObjectiveModel for ForestModel {
    fn objective_count(&self) -> usize {
        self.forests.len()
    }

    fn predict(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.forests
            .iter()
            .map(|f| f.predict_state(state))
            .collect()
    }
}
