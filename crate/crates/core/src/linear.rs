//! Linear lambda-gradient ranker: scores are a learned dot product, and
//! training follows the per-query residuals from [`crate::lambda`].

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::lambda::compute_lambdas;
use crate::metrics::NdcgConfig;
use crate::scorer::Scorer;

/// A linear scoring model `score(x) = w . x`. No bias term: scores enter
/// NDCG only through their ordering, which a constant shift cannot change.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>) -> Self {
        LinearModel { weights }
    }

    pub fn zeros(feature_count: usize) -> Self {
        LinearModel {
            weights: vec![0.0; feature_count],
        }
    }
}

impl Scorer for LinearModel {
    fn feature_count(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, features: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum()
    }
}

/// Dot product with an explicit dimension check.
pub fn score_linear(model: &LinearModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            actual: features.len(),
        });
    }
    Ok(model.score(features))
}

/// Gradient training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 1e-3,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Trains a linear model from zero weights with per-query batched residual
/// updates: `w += lr * sum_i residual_i * x_i`. Deterministic for a fixed
/// seed; query order is reshuffled each epoch when `shuffle` is set.
pub fn train_linear_lambdarank(dataset: &Dataset, config: &TrainConfig) -> Result<LinearModel> {
    config.validate()?;
    if dataset.queries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ndcg = NdcgConfig::default();
    let mut weights = vec![0.0; dataset.feature_count];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..dataset.queries.len()).collect();

    for epoch in 1..=config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for &qi in &order {
            let query = &dataset.queries[qi];
            let scores: Vec<f64> = query
                .documents
                .iter()
                .map(|d| weights.iter().zip(&d.features).map(|(w, x)| w * x).sum())
                .collect();
            let grads = compute_lambdas(query, &scores, &ndcg)?;
            for (doc, residual) in query.documents.iter().zip(&grads.residuals) {
                if *residual == 0.0 {
                    continue;
                }
                for (w, x) in weights.iter_mut().zip(&doc.features) {
                    *w += config.learning_rate * residual * x;
                }
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteUpdate { epoch });
        }
    }

    Ok(LinearModel::new(weights))
}
