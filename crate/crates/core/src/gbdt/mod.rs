//! Error-driven boosting over a background ranker: single-feature basis
//! stages fit by least squares, and regression-tree stages with Newton leaf
//! values, both driven by the lambda residuals of [`crate::lambda`].

mod tree;

pub use tree::{fit_regression_tree, tree_predict, RegressionTree, TreeNode};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lambda::compute_lambdas;
use crate::metrics::{dataset_ave_ndcg, NdcgConfig};
use crate::model::Model;
use crate::scorer::Scorer;

/// A boosting basis function: one input feature, or a regression tree over
/// the input features.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisFunction {
    SingleFeature { feature_index: usize },
    Tree(RegressionTree),
}

/// One boosting stage. For tree stages the leaf values already embed the
/// fitted step, so `coefficient` is fixed at 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub basis: BasisFunction,
    pub coefficient: f64,
}

impl Stage {
    fn contribution(&self, features: &[f64]) -> Result<f64> {
        match &self.basis {
            BasisFunction::SingleFeature { feature_index } => {
                let value = features.get(*feature_index).ok_or(Error::DimensionMismatch {
                    expected: *feature_index + 1,
                    actual: features.len(),
                })?;
                Ok(self.coefficient * value)
            }
            BasisFunction::Tree(tree) => Ok(self.coefficient * tree.predict(features)?),
        }
    }
}

/// A background scorer plus shrinkage-scaled boosting stages.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedEnsemble {
    pub background: Box<Model>,
    pub shrinkage: f64,
    pub stages: Vec<Stage>,
    pub feature_count: usize,
}

impl Scorer for BoostedEnsemble {
    fn feature_count(&self) -> usize {
        self.feature_count
    }

    fn score(&self, features: &[f64]) -> f64 {
        let mut score = self.background.score(features);
        for stage in &self.stages {
            score += self.shrinkage
                * stage
                    .contribution(features)
                    .expect("stage dimensions validated at construction");
        }
        score
    }
}

/// Boosting settings shared by both trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    /// Number of boosting rounds M.
    pub rounds: usize,
    /// Shrinkage coefficient, in (0, 1].
    pub shrinkage: f64,
    /// Leaf budget per tree.
    pub leaves: usize,
    pub min_samples_per_leaf: usize,
    /// Draw row/feature subsamples before each node split.
    pub randomize: bool,
    /// Subsample rate used when `randomize` is set.
    pub sample_rate: f64,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            rounds: 500,
            shrinkage: 0.5,
            leaves: 20,
            min_samples_per_leaf: 1,
            randomize: false,
            sample_rate: 0.7,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::InvalidConfig("rounds must be >= 1".into()));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::InvalidConfig("shrinkage must be in (0, 1]".into()));
        }
        if self.leaves < 1 {
            return Err(Error::InvalidConfig("leaves must be >= 1".into()));
        }
        if self.min_samples_per_leaf < 1 {
            return Err(Error::InvalidConfig(
                "min_samples_per_leaf must be >= 1".into(),
            ));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(Error::InvalidConfig("sample_rate must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Least-squares coefficient for fitting residuals with a basis column:
/// the unique minimizer of `sum (y_i - beta * h_i)^2`, that is
/// `beta = sum(y h) / sum(h^2)`.
pub fn optimal_beta(residuals: &[f64], basis_values: &[f64]) -> Result<f64> {
    let (sum_yh, sum_h2) = basis_sums(residuals, basis_values)?;
    Ok(sum_yh / sum_h2)
}

/// The least-squares loss at the optimal coefficient:
/// `sum(y^2) - (sum(y h))^2 / sum(h^2)`.
pub fn ls_loss(residuals: &[f64], basis_values: &[f64]) -> Result<f64> {
    let (sum_yh, sum_h2) = basis_sums(residuals, basis_values)?;
    let sum_y2: f64 = residuals.iter().map(|y| y * y).sum();
    Ok(sum_y2 - sum_yh * sum_yh / sum_h2)
}

fn basis_sums(residuals: &[f64], basis_values: &[f64]) -> Result<(f64, f64)> {
    if residuals.len() != basis_values.len() {
        return Err(Error::LengthMismatch {
            left: residuals.len(),
            right: basis_values.len(),
        });
    }
    let sum_h2: f64 = basis_values.iter().map(|h| h * h).sum();
    if sum_h2 == 0.0 {
        return Err(Error::DegenerateBasis);
    }
    let sum_yh: f64 = residuals
        .iter()
        .zip(basis_values)
        .map(|(y, h)| y * h)
        .sum();
    Ok((sum_yh, sum_h2))
}

/// Background score plus shrinkage-scaled stage contributions, in stage order.
pub fn ensemble_score(ensemble: &BoostedEnsemble, features: &[f64]) -> Result<f64> {
    if features.len() != ensemble.feature_count {
        return Err(Error::DimensionMismatch {
            expected: ensemble.feature_count,
            actual: features.len(),
        });
    }
    let mut score = ensemble.background.score(features);
    for stage in &ensemble.stages {
        score += ensemble.shrinkage * stage.contribution(features)?;
    }
    Ok(score)
}

struct FlatDataset<'a> {
    features: Vec<&'a [f64]>,
    /// document span per query, aligned with `dataset.queries`
    spans: Vec<(usize, usize)>,
}

fn flatten(dataset: &Dataset) -> FlatDataset<'_> {
    let mut features = Vec::with_capacity(dataset.document_count());
    let mut spans = Vec::with_capacity(dataset.queries.len());
    for query in &dataset.queries {
        let start = features.len();
        features.extend(query.documents.iter().map(|d| d.features.as_slice()));
        spans.push((start, features.len()));
    }
    FlatDataset { features, spans }
}

fn check_training_inputs(
    background: &Model,
    train: &Dataset,
    config: &BoostConfig,
    ndcg: &NdcgConfig,
) -> Result<()> {
    config.validate()?;
    ndcg.validate()?;
    if train.queries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if background.feature_count() != train.feature_count {
        return Err(Error::DimensionMismatch {
            expected: train.feature_count,
            actual: background.feature_count(),
        });
    }
    Ok(())
}

fn residuals_and_weights(
    dataset: &Dataset,
    flat: &FlatDataset<'_>,
    scores: &[f64],
    ndcg: &NdcgConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut residuals = vec![0.0; scores.len()];
    let mut weights = vec![0.0; scores.len()];
    for (query, &(start, end)) in dataset.queries.iter().zip(&flat.spans) {
        let grads = compute_lambdas(query, &scores[start..end], ndcg)?;
        residuals[start..end].copy_from_slice(&grads.residuals);
        weights[start..end].copy_from_slice(&grads.newton_weights);
    }
    Ok((residuals, weights))
}

fn per_query_scores(flat: &FlatDataset<'_>, scores: &[f64]) -> Vec<Vec<f64>> {
    flat.spans
        .iter()
        .map(|&(start, end)| scores[start..end].to_vec())
        .collect()
}

/// Training Ave-NDCG for the round observer; NaN when no query is evaluable
/// (training itself is still well-defined there, with all-zero gradients).
fn trace_ave_ndcg(
    train: &Dataset,
    flat: &FlatDataset<'_>,
    scores: &[f64],
    ndcg: &NdcgConfig,
) -> Result<f64> {
    match dataset_ave_ndcg(train, &per_query_scores(flat, scores), ndcg) {
        Ok(ave) => Ok(ave),
        Err(Error::NoEvaluableQueries) => Ok(f64::NAN),
        Err(err) => Err(err),
    }
}

/// Adapts `background` by boosting with single-feature basis functions:
/// each round refits the lambda residuals with the feature of lowest
/// least-squares loss (ties to the lowest index) and appends it with its
/// shrunk optimal coefficient.
pub fn lambda_boost(
    background: &Model,
    train: &Dataset,
    config: &BoostConfig,
    ndcg: &NdcgConfig,
) -> Result<BoostedEnsemble> {
    lambda_boost_traced(background, train, config, ndcg, None)
}

/// [`lambda_boost`] with a per-round observer receiving the round number
/// (1-based) and the training Ave-NDCG after that round's update.
pub fn lambda_boost_traced(
    background: &Model,
    train: &Dataset,
    config: &BoostConfig,
    ndcg: &NdcgConfig,
    mut trace: Option<&mut dyn FnMut(usize, f64)>,
) -> Result<BoostedEnsemble> {
    check_training_inputs(background, train, config, ndcg)?;
    let flat = flatten(train);
    let mut scores: Vec<f64> = flat.features.iter().map(|x| background.score(x)).collect();
    let mut stages = Vec::with_capacity(config.rounds);

    for round in 1..=config.rounds {
        let (residuals, _) = residuals_and_weights(train, &flat, &scores, ndcg)?;
        let sum_y2: f64 = residuals.iter().map(|y| y * y).sum();

        let mut best: Option<(usize, f64, f64)> = None; // (feature, loss, beta)
        for feature in 0..train.feature_count {
            let mut sum_h2 = 0.0;
            let mut sum_yh = 0.0;
            for (x, y) in flat.features.iter().zip(&residuals) {
                let h = x[feature];
                sum_h2 += h * h;
                sum_yh += y * h;
            }
            if sum_h2 == 0.0 {
                continue;
            }
            let loss = sum_y2 - sum_yh * sum_yh / sum_h2;
            if best.as_ref().map_or(true, |&(_, l, _)| loss < l) {
                best = Some((feature, loss, sum_yh / sum_h2));
            }
        }
        let (feature_index, _, beta) = best.ok_or(Error::AllFeaturesDegenerate)?;

        for (score, x) in scores.iter_mut().zip(&flat.features) {
            *score += config.shrinkage * beta * x[feature_index];
        }
        stages.push(Stage {
            basis: BasisFunction::SingleFeature { feature_index },
            coefficient: beta,
        });

        if let Some(observer) = trace.as_deref_mut() {
            observer(round, trace_ave_ndcg(train, &flat, &scores, ndcg)?);
        }
    }

    Ok(BoostedEnsemble {
        background: Box::new(background.clone()),
        shrinkage: config.shrinkage,
        stages,
        feature_count: train.feature_count,
    })
}

/// Adapts `background` by boosting with regression trees: each round fits a
/// tree to the lambda residuals, replaces every leaf value by the Newton
/// step `sum(residual) / sum(weight)` over its members (0 when the weight
/// sum is 0), and appends the tree under shrinkage.
pub fn lambda_smart(
    background: &Model,
    train: &Dataset,
    config: &BoostConfig,
    ndcg: &NdcgConfig,
) -> Result<BoostedEnsemble> {
    lambda_smart_traced(background, train, config, ndcg, None)
}

/// [`lambda_smart`] with the same per-round observer as
/// [`lambda_boost_traced`].
pub fn lambda_smart_traced(
    background: &Model,
    train: &Dataset,
    config: &BoostConfig,
    ndcg: &NdcgConfig,
    mut trace: Option<&mut dyn FnMut(usize, f64)>,
) -> Result<BoostedEnsemble> {
    check_training_inputs(background, train, config, ndcg)?;
    let flat = flatten(train);
    let mut scores: Vec<f64> = flat.features.iter().map(|x| background.score(x)).collect();
    let mut stages = Vec::with_capacity(config.rounds);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    for round in 1..=config.rounds {
        let (residuals, weights) = residuals_and_weights(train, &flat, &scores, ndcg)?;

        let mut tree = fit_regression_tree(&flat.features, &residuals, config, &mut rng)?;

        let slots: Vec<usize> = flat
            .features
            .iter()
            .map(|x| tree.leaf_slot(x))
            .collect::<Result<_>>()?;
        let mut leaf_residual = vec![0.0; tree.leaf_count];
        let mut leaf_weight = vec![0.0; tree.leaf_count];
        for (i, &slot) in slots.iter().enumerate() {
            leaf_residual[slot] += residuals[i];
            leaf_weight[slot] += weights[i];
        }
        let values: Vec<f64> = leaf_residual
            .iter()
            .zip(&leaf_weight)
            .map(|(&r, &w)| if w == 0.0 { 0.0 } else { r / w })
            .collect();
        tree.set_leaf_values(&values)?;

        for (i, score) in scores.iter_mut().enumerate() {
            *score += config.shrinkage * values[slots[i]];
        }
        stages.push(Stage {
            basis: BasisFunction::Tree(tree),
            coefficient: 1.0,
        });

        if let Some(observer) = trace.as_deref_mut() {
            observer(round, trace_ave_ndcg(train, &flat, &scores, ndcg)?);
        }
    }

    Ok(BoostedEnsemble {
        background: Box::new(background.clone()),
        shrinkage: config.shrinkage,
        stages,
        feature_count: train.feature_count,
    })
}
