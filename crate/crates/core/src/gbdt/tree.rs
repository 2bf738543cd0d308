//! Regression trees grown best-first with mean-squared-error splits.
//!
//! Split candidates are midpoints between consecutive distinct sorted feature
//! values; the frontier leaf whose best split gives the largest SSE reduction
//! is split next, until the leaf budget is reached or no split helps. With
//! randomization on, every node draws a fresh row subsample and feature
//! subsample before choosing its split; the chosen split then routes the
//! node's full row set.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

use super::BoostConfig;

/// One tree node. Routing convention: `feature <= threshold` goes left.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
    },
}

impl TreeNode {
    fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

/// A fitted regression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub root: TreeNode,
    pub leaf_count: usize,
}

impl RegressionTree {
    pub fn new(root: TreeNode) -> Self {
        let leaf_count = root.leaf_count();
        RegressionTree { root, leaf_count }
    }

    /// Value of the unique leaf whose region contains `features`.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { value } => return Ok(*value),
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    let value = features.get(*feature_index).ok_or(Error::DimensionMismatch {
                        expected: *feature_index + 1,
                        actual: features.len(),
                    })?;
                    node = if *value <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Index (in left-to-right leaf order) of the leaf containing `features`.
    pub fn leaf_slot(&self, features: &[f64]) -> Result<usize> {
        let mut node = &self.root;
        let mut offset = 0;
        loop {
            match node {
                TreeNode::Leaf { .. } => return Ok(offset),
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    let value = features.get(*feature_index).ok_or(Error::DimensionMismatch {
                        expected: *feature_index + 1,
                        actual: features.len(),
                    })?;
                    if *value <= *threshold {
                        node = left;
                    } else {
                        offset += left.leaf_count();
                        node = right;
                    }
                }
            }
        }
    }

    /// Overwrites leaf values in left-to-right order.
    pub fn set_leaf_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.leaf_count {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.leaf_count,
            });
        }
        fn apply(node: &mut TreeNode, values: &[f64], next: &mut usize) {
            match node {
                TreeNode::Leaf { value } => {
                    *value = values[*next];
                    *next += 1;
                }
                TreeNode::Internal { left, right, .. } => {
                    apply(left, values, next);
                    apply(right, values, next);
                }
            }
        }
        let mut next = 0;
        apply(&mut self.root, values, &mut next);
        Ok(())
    }
}

/// Routes `features` through `tree` to its leaf value.
pub fn tree_predict(tree: &RegressionTree, features: &[f64]) -> Result<f64> {
    tree.predict(features)
}

#[derive(Debug, Clone)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct BuildNode {
    rows: Vec<usize>,
    mean: f64,
    best: Option<Candidate>,
    split: Option<(usize, f64, usize, usize)>,
}

/// Fits a regression tree to `targets` by greedy best-first growth to at
/// most `config.leaves` leaves. Leaf values are the plain mean of the
/// targets that land there.
pub fn fit_regression_tree<R: Rng>(
    samples: &[&[f64]],
    targets: &[f64],
    config: &BoostConfig,
    rng: &mut R,
) -> Result<RegressionTree> {
    if samples.is_empty() {
        return Err(Error::EmptyTraining);
    }
    if samples.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: samples.len(),
            right: targets.len(),
        });
    }
    config.validate()?;
    let feature_count = samples[0].len();

    let mut nodes: Vec<BuildNode> = Vec::new();
    let all_rows: Vec<usize> = (0..samples.len()).collect();
    let root = make_node(all_rows, samples, targets, feature_count, config, rng);
    nodes.push(root);

    let mut frontier: Vec<usize> = vec![0];
    let mut leaves = 1;

    while leaves < config.leaves {
        let Some(pick) = frontier
            .iter()
            .copied()
            .filter(|&id| nodes[id].best.is_some())
            .max_by(|&a, &b| {
                let ga = nodes[a].best.as_ref().unwrap().gain;
                let gb = nodes[b].best.as_ref().unwrap().gain;
                ga.total_cmp(&gb).then(b.cmp(&a))
            })
        else {
            break;
        };
        frontier.retain(|&id| id != pick);

        let candidate = nodes[pick].best.clone().unwrap();
        let rows = std::mem::take(&mut nodes[pick].rows);
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| samples[r][candidate.feature] <= candidate.threshold);
        // the threshold separates observed values, and each full side
        // contains the subsample side that satisfied min_samples_per_leaf
        debug_assert!(left_rows.len() >= config.min_samples_per_leaf);
        debug_assert!(right_rows.len() >= config.min_samples_per_leaf);

        let left_id = nodes.len();
        nodes.push(make_node(left_rows, samples, targets, feature_count, config, rng));
        let right_id = nodes.len();
        nodes.push(make_node(right_rows, samples, targets, feature_count, config, rng));
        nodes[pick].split = Some((candidate.feature, candidate.threshold, left_id, right_id));
        frontier.push(left_id);
        frontier.push(right_id);
        leaves += 1;
    }

    Ok(RegressionTree::new(to_tree_node(&nodes, 0)))
}

fn to_tree_node(nodes: &[BuildNode], id: usize) -> TreeNode {
    match nodes[id].split {
        Some((feature_index, threshold, left, right)) => TreeNode::Internal {
            feature_index,
            threshold,
            left: Box::new(to_tree_node(nodes, left)),
            right: Box::new(to_tree_node(nodes, right)),
        },
        None => TreeNode::Leaf {
            value: nodes[id].mean,
        },
    }
}

fn make_node<R: Rng>(
    rows: Vec<usize>,
    samples: &[&[f64]],
    targets: &[f64],
    feature_count: usize,
    config: &BoostConfig,
    rng: &mut R,
) -> BuildNode {
    let mean = mean_of(&rows, targets);
    let best = best_split(&rows, samples, targets, feature_count, config, rng);
    BuildNode {
        rows,
        mean,
        best,
        split: None,
    }
}

fn mean_of(rows: &[usize], targets: &[f64]) -> f64 {
    let first = targets[rows[0]];
    if rows.iter().all(|&r| targets[r] == first) {
        return first;
    }
    rows.iter().map(|&r| targets[r]).sum::<f64>() / rows.len() as f64
}

/// Sum of squared deviations from the mean; exactly zero for constant values.
fn sse_of(values: &[f64]) -> f64 {
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

fn subsample<R: Rng>(indices: &[usize], rate: f64, rng: &mut R) -> Vec<usize> {
    let count = ((indices.len() as f64 * rate).round() as usize).clamp(1, indices.len());
    let mut chosen: Vec<usize> = indices
        .choose_multiple(rng, count)
        .copied()
        .collect();
    chosen.sort_unstable();
    chosen
}

/// Best (feature, midpoint threshold) by SSE reduction over the node's rows,
/// scanning features in ascending index and thresholds in ascending value so
/// ties resolve to the first candidate. Returns `None` when no split strictly
/// reduces the SSE or `min_samples_per_leaf` cannot be honored.
fn best_split<R: Rng>(
    rows: &[usize],
    samples: &[&[f64]],
    targets: &[f64],
    feature_count: usize,
    config: &BoostConfig,
    rng: &mut R,
) -> Option<Candidate> {
    if rows.len() < 2 * config.min_samples_per_leaf || rows.len() < 2 {
        return None;
    }

    let all_features: Vec<usize> = (0..feature_count).collect();
    let (considered_rows, considered_features) = if config.randomize {
        (
            subsample(rows, config.sample_rate, rng),
            subsample(&all_features, config.sample_rate, rng),
        )
    } else {
        (rows.to_vec(), all_features)
    };
    if considered_rows.len() < 2 {
        return None;
    }

    let node_values: Vec<f64> = considered_rows.iter().map(|&r| targets[r]).collect();
    let node_sse = sse_of(&node_values);
    if node_sse == 0.0 {
        return None;
    }

    let mut best: Option<Candidate> = None;
    let mut column: Vec<(f64, f64)> = Vec::with_capacity(considered_rows.len());

    for &feature in &considered_features {
        column.clear();
        column.extend(
            considered_rows
                .iter()
                .map(|&r| (samples[r][feature], targets[r])),
        );
        column.sort_by(|a, b| a.0.total_cmp(&b.0));

        let total_sum: f64 = column.iter().map(|(_, t)| t).sum();
        let n = column.len() as f64;
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        let total_sq: f64 = column.iter().map(|(_, t)| t * t).sum();

        for i in 0..column.len() - 1 {
            left_sum += column[i].1;
            left_sq += column[i].1 * column[i].1;
            if column[i].0 == column[i + 1].0 {
                continue;
            }
            let left_n = (i + 1) as f64;
            let right_n = n - left_n;
            if (i + 1) < config.min_samples_per_leaf
                || (column.len() - i - 1) < config.min_samples_per_leaf
            {
                continue;
            }
            let left_sse = (left_sq - left_sum * left_sum / left_n).max(0.0);
            let right_sum = total_sum - left_sum;
            let right_sse = (total_sq - left_sq - right_sum * right_sum / right_n).max(0.0);
            let gain = node_sse - left_sse - right_sse;
            if gain > 0.0 && best.as_ref().map_or(true, |b| gain > b.gain) {
                best = Some(Candidate {
                    feature,
                    threshold: (column[i].0 + column[i + 1].0) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}
